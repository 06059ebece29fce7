import json
import math

import numpy as np
import pytest

from vqsbench import harness
from vqsbench.hamiltonian import IsingHamiltonian, ProblemInstance, random_instance
from vqsbench.harness import (CSV_HEADER, TROTTER, UNSOLVED, VQS, RunResult, SweepConfig,
                              min_depth_trotter, min_depth_vqs, read_results, replay, results_to_csv,
                              run_sweep, sweep_cells, write_results)
from vqsbench.trotter import TrotterPlan, trotter_depth


def x_instance():
    return ProblemInstance(IsingHamiltonian.from_coefficients([1.0], []), np.zeros(1), seed=0)


@pytest.mark.parametrize("t", [0.5, 3.0, 9.0])
def test_vqs_single_qubit_needs_one_layer(t):
    r = min_depth_vqs(x_instance(), t)
    assert r.solved and r.structural_count == 1 and r.min_depth == 3
    assert r.final_fidelity >= 1 - 1e-6


def test_vqs_tiny_time_one_layer():
    r = min_depth_vqs(random_instance(3, 1), 1e-6)
    assert r.structural_count == 1 and r.final_fidelity > 1 - 1e-9


def test_vqs_deterministic():
    inst = random_instance(2, 77)
    first, second = min_depth_vqs(inst, 2.0), min_depth_vqs(random_instance(2, 77), 2.0)
    first.wall_time_seconds = second.wall_time_seconds = None
    assert first == second


def test_vqs_saturation_is_unsolved():
    r = min_depth_vqs(random_instance(4, 3), 4.0, threshold=0.999999, max_layers=1)
    assert r.status == UNSOLVED and r.structural_count == 1


def test_trotter_commuting_one_step():
    base = random_instance(4, 2)
    inst = ProblemInstance(IsingHamiltonian.from_coefficients(base.hamiltonian.a, [0, 0, 0]),
                           base.initial_layer_params, base.seed)
    r = min_depth_trotter(inst, 5.0)
    assert r.solved and r.structural_count == 1 and r.min_depth == 5


def test_trotter_steps_grow_with_time():
    # the Trotter error oscillates in t, so a single instance can need fewer
    # steps at a later time (seed index 2 at n_q=3: 1, 2, 1, 3, 2, 2, 6, 3, ...)
    counts = np.array([[min_depth_trotter(random_instance(3, s), float(t)).structural_count
                        for t in range(1, 11)] for s in range(20)])
    assert np.all(np.diff(counts.mean(axis=0)) >= 0)
    assert np.all(np.diff(np.median(counts, axis=0)) >= 0)
    assert np.all(counts[:, -1] > counts[:, 0])


def test_success_rows_meet_threshold_and_depth_formula():
    inst = random_instance(3, 9)
    for t in (1.0, 2.0, 3.0):
        r = min_depth_trotter(inst, t)
        assert r.solved and r.final_fidelity >= 0.95
        assert r.min_depth == trotter_depth(TrotterPlan(r.structural_count, t))
        if r.structural_count > 1:
            assert replay(r, r.structural_count - 1) < 0.95
        v = min_depth_vqs(inst, t)
        assert v.solved and v.final_fidelity >= 0.95 and v.min_depth == 3 * v.structural_count
        assert replay(v) == pytest.approx(v.final_fidelity, abs=0)


def test_threshold_validation():
    with pytest.raises(ValueError):
        min_depth_trotter(random_instance(2, 0), 1.0, threshold=1.0)
    with pytest.raises(ValueError):
        SweepConfig(fidelity_threshold=0.0)


def test_sweep_cardinality_and_order():
    config = SweepConfig(n_qubits_range=[2], t_final_values=[1.0], n_instances=1)
    rows = run_sweep(config)
    assert [r.method for r in rows] == [VQS, TROTTER]
    config = SweepConfig(n_qubits_range=[3, 2], t_final_values=[2.0, 1.0], n_instances=2)
    keys = [(c.method, c.n_qubits, c.t_final, c.seed) for c in sweep_cells(config)]
    order = {VQS: 0, TROTTER: 1}
    assert keys == sorted(keys, key=lambda k: (order[k[0]], k[1], k[2], k[3]))
    assert len(keys) == 2 * 2 * 2 * 2


def test_seeds_shared_across_times_and_methods():
    config = SweepConfig(n_qubits_range=[2], t_final_values=[1.0, 2.0], n_instances=3)
    seeds = {}
    for c in sweep_cells(config):
        seeds.setdefault((c.method, c.t_final), set()).add(c.seed)
    assert len({frozenset(s) for s in seeds.values()}) == 1


def test_sweep_parallel_matches_serial():
    config = SweepConfig(n_qubits_range=[2, 3], t_final_values=[1.0, 2.0], n_instances=2)
    assert results_to_csv(run_sweep(config, jobs=1)) == results_to_csv(run_sweep(config, jobs=2))


def test_failing_cell_recorded(monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr(harness, "min_depth_trotter", boom)
    rows = run_sweep(SweepConfig(n_qubits_range=[2], t_final_values=[1.0], n_instances=1))
    assert rows[0].solved and rows[1].status == UNSOLVED and math.isnan(rows[1].final_fidelity)


def test_csv_roundtrip(tmp_path):
    rows = [RunResult(VQS, 3, 2.0, 2**64 - 1, "success", 6, 2, 0.987654321012345, 0.0123, 400, 1.5),
            RunResult(TROTTER, 3, 2.0, 5, "success", 8, 2, 0.96, None, None, 0.01)]
    path = tmp_path / "r.csv"
    write_results(path, rows)
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert "0.987654321012," in text  # 12 significant digits
    back = read_results(path)
    assert back[0].instance_seed == 2**64 - 1 and back[1].mclachlan_final is None
    assert back[0].wall_time_seconds is None  # timing off by default
    write_results(path, rows, timing=True)
    assert read_results(path)[0].wall_time_seconds == 1.5


def test_config_roundtrip_and_unknown_field():
    config = SweepConfig(n_qubits_range=[2, 3], t_final_values=[1.0], n_instances=2)
    assert SweepConfig.from_dict(json.loads(json.dumps(config.to_dict()))) == config
    with pytest.raises(KeyError):
        SweepConfig.from_dict({"n_qubit_range": [2]})


def test_aggregate_cells():
    rows = [RunResult(VQS, 2, 1.0, s, "success", d, d // 3, 0.99) for s, d in [(1, 3), (2, 6), (3, 12)]]
    rows.append(RunResult(VQS, 2, 1.0, 4, UNSOLVED, 90, 30, 0.5))
    (cell,) = harness.aggregate_cells(rows)
    assert cell["n_rows"] == 4 and cell["n_solved"] == 3
    assert cell["mean_depth"] == 7.0 and cell["median_depth"] == 6.0
