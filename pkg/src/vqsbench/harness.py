"""Adaptive minimum-depth search and the (n_q, t_f, instance) sweep.

For each cell the structural size (VQS layers, Trotter steps) is raised one
unit at a time, restarting from scratch, until the final state reaches the
fidelity threshold against exact evolution.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from statistics import median
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .ansatz import HvaAnsatz, circuit_depth, initial_state
from .exact import exact_evolve, fidelity
from .hamiltonian import COEFFICIENT_RANGE, INITIAL_PARAM_RANGE, ProblemInstance, random_instance
from .trotter import TrotterPlan, trotter_depth, trotter_evolve
from .vqs import StiffnessError, VqsConfig, integrate

log = logging.getLogger(__name__)

VQS = "vqs"
TROTTER = "trotter"
METHODS = (VQS, TROTTER)

SUCCESS = "success"
UNSOLVED = "unsolved"

CSV_HEADER = ["method", "n_qubits", "t_final", "instance_seed", "status", "min_depth",
              "structural_count", "final_fidelity", "mclachlan_final", "rhs_evaluations", "wall_time_s"]

# per-attempt integrator budget used by the sweep; see SweepConfig.vqs_config
DEFAULT_VQS_MAX_STEPS = 2000


@dataclass
class RunResult:
    method: str
    n_qubits: int
    t_final: float
    instance_seed: int
    status: str
    min_depth: int
    structural_count: int
    final_fidelity: float
    mclachlan_final: float | None = None
    rhs_evaluations: int | None = None
    wall_time_seconds: float | None = None

    @property
    def solved(self) -> bool:
        return self.status == SUCCESS


def vqs_fidelity(instance: ProblemInstance, t_final: float, n_layers: int,
                 config: VqsConfig) -> tuple[float, float | None, int]:
    """Final-time fidelity of one VQS run: (fidelity, last McLachlan distance, rhs count).

    A run whose step size collapses counts as a failed attempt (fidelity 0).
    """
    ansatz = HvaAnsatz(instance, n_layers)
    target = exact_evolve(instance, t_final, ansatz.initial_state)
    try:
        traj = integrate(ansatz, config, t_final)
    except StiffnessError as exc:
        log.info("n_q=%d t_f=%g layers=%d: %s", instance.n_qubits, t_final, n_layers, exc)
        traj = exc.trajectory
        dist = traj.mclachlan_distance[-1] if traj.mclachlan_distance else None
        return 0.0, dist, traj.rhs_evaluations
    f = fidelity(target, ansatz.prepare_state(traj.final_params))
    return f, traj.mclachlan_distance[-1], traj.rhs_evaluations


def trotter_fidelity(instance: ProblemInstance, t_final: float, n_steps: int) -> float:
    psi0 = initial_state(instance)
    target = exact_evolve(instance, t_final, psi0)
    return fidelity(target, trotter_evolve(instance, TrotterPlan(n_steps, t_final), psi0))


def _check_threshold(threshold: float) -> None:
    if not 0 < threshold < 1:
        raise ValueError(f"fidelity threshold must lie in (0, 1), got {threshold}")


def min_depth_vqs(instance: ProblemInstance, t_final: float, threshold: float = 0.95,
                  config: VqsConfig | None = None, max_layers: int = 30) -> RunResult:
    _check_threshold(threshold)
    config = config or VqsConfig(max_steps=DEFAULT_VQS_MAX_STEPS)
    start = time.perf_counter()
    rhs_total = 0
    f, dist = 0.0, None
    for layers in range(1, max_layers + 1):
        f, dist, rhs = vqs_fidelity(instance, t_final, layers, config)
        rhs_total += rhs
        if f >= threshold:
            status = SUCCESS
            break
    else:
        status = UNSOLVED
    return RunResult(VQS, instance.n_qubits, float(t_final), instance.seed, status,
                     3 * layers, layers, f, dist, rhs_total, time.perf_counter() - start)


def min_depth_trotter(instance: ProblemInstance, t_final: float, threshold: float = 0.95,
                      max_steps: int = 500) -> RunResult:
    _check_threshold(threshold)
    start = time.perf_counter()
    f = 0.0
    for steps in range(1, max_steps + 1):
        f = trotter_fidelity(instance, t_final, steps)
        if f >= threshold:
            status = SUCCESS
            break
    else:
        status = UNSOLVED
    depth = trotter_depth(TrotterPlan(steps, t_final))
    return RunResult(TROTTER, instance.n_qubits, float(t_final), instance.seed, status,
                     depth, steps, f, None, None, time.perf_counter() - start)


def replay(row: RunResult, structural_count: int | None = None,
           vqs_config: VqsConfig | None = None) -> float:
    """Recompute the final fidelity of a row, optionally at a different size."""
    count = row.structural_count if structural_count is None else structural_count
    instance = random_instance(row.n_qubits, row.instance_seed)
    if row.method == VQS:
        config = vqs_config or VqsConfig(max_steps=DEFAULT_VQS_MAX_STEPS)
        return vqs_fidelity(instance, row.t_final, count, config)[0]
    return trotter_fidelity(instance, row.t_final, count)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepConfig:
    n_qubits_range: list[int] = field(default_factory=lambda: list(range(2, 11)))
    t_final_values: list[float] = field(default_factory=lambda: [float(t) for t in range(1, 15)])
    n_instances: int = 50
    fidelity_threshold: float = 0.95
    max_layers: int = 30
    max_trotter_steps: int = 500
    base_seed: int = 0
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    vqs_config: VqsConfig = field(default_factory=lambda: VqsConfig(max_steps=DEFAULT_VQS_MAX_STEPS))

    def __post_init__(self):
        _check_threshold(self.fidelity_threshold)
        if self.max_layers < 1 or self.max_trotter_steps < 1:
            raise ValueError("max_layers and max_trotter_steps must be >= 1")
        if self.n_instances < 1:
            raise ValueError("n_instances must be >= 1")
        if any(n < 2 for n in self.n_qubits_range):
            raise ValueError("every n_qubits value must be >= 2")
        if any(not t > 0 for t in self.t_final_values):
            raise ValueError("every t_final value must be positive")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["vqs_config"] = self.vqs_config.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise KeyError(sorted(unknown)[0])
        if "vqs_config" in data:
            data["vqs_config"] = VqsConfig.from_dict(data["vqs_config"])
        if "t_final_values" in data:
            data["t_final_values"] = [float(t) for t in data["t_final_values"]]
        return cls(**data)


def instance_seed(base_seed: int, n_qubits: int, index: int) -> int:
    """Seed of instance ``index`` at size ``n_qubits``; shared by all t_f and both methods."""
    ss = np.random.SeedSequence([base_seed, n_qubits, index])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Cell:
    method: str
    n_qubits: int
    t_final: float
    seed: int


def sweep_cells(config: SweepConfig) -> list[Cell]:
    """All cells in canonical (method, n_q, t_f, seed) order."""
    cells = []
    for method in METHODS:
        if method not in config.methods:
            continue
        for n in sorted(config.n_qubits_range):
            seeds = sorted(instance_seed(config.base_seed, n, i) for i in range(config.n_instances))
            for t in sorted(config.t_final_values):
                cells.extend(Cell(method, n, t, s) for s in seeds)
    return cells


def run_cell(cell: Cell, config: SweepConfig) -> RunResult:
    try:
        instance = random_instance(cell.n_qubits, cell.seed)
        if cell.method == VQS:
            return min_depth_vqs(instance, cell.t_final, config.fidelity_threshold,
                                 config.vqs_config, config.max_layers)
        return min_depth_trotter(instance, cell.t_final, config.fidelity_threshold,
                                 config.max_trotter_steps)
    except Exception:  # a broken cell must not abort the sweep
        log.exception("cell %s failed", cell)
        return RunResult(cell.method, cell.n_qubits, cell.t_final, cell.seed, UNSOLVED,
                         0, 0, float("nan"))


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(config: SweepConfig, jobs: int = 1, progress=None) -> list[RunResult]:
    """Run every cell; output order is canonical whatever the worker count."""
    cells = sweep_cells(config)
    if jobs <= 1:
        results = []
        for cell in cells:
            results.append(run_cell(cell, config))
            if progress:
                progress(results[-1])
        return results
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = []
        for r in pool.map(_run_cell_args, [(c, config) for c in cells], chunksize=1):
            results.append(r)
            if progress:
                progress(r)
        return results


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def results_to_csv(results: Iterable[RunResult], timing: bool = False) -> str:
    """Serialise rows.  Wall times are left blank unless ``timing`` is set, so
    that identical sweeps give byte-identical files."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in results:
        writer.writerow([
            r.method, r.n_qubits, _fmt(float(r.t_final)), r.instance_seed, r.status, r.min_depth,
            r.structural_count, _fmt(float(r.final_fidelity)),
            _fmt(None if r.mclachlan_final is None else float(r.mclachlan_final)),
            _fmt(r.rhs_evaluations),
            _fmt(float(r.wall_time_seconds)) if timing and r.wall_time_seconds is not None else "",
        ])
    return buf.getvalue()


def write_results(path: str | Path, results: Sequence[RunResult], timing: bool = False) -> None:
    Path(path).write_text(results_to_csv(results, timing))


def read_results(path: str | Path) -> list[RunResult]:
    def opt(v, cast):
        return None if v == "" else cast(v)

    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for rec in reader:
            rows.append(RunResult(
                rec["method"], int(rec["n_qubits"]), float(rec["t_final"]), int(rec["instance_seed"]),
                rec["status"], int(rec["min_depth"]), int(rec["structural_count"]),
                float(rec["final_fidelity"]), opt(rec["mclachlan_final"], float),
                opt(rec["rhs_evaluations"], int), opt(rec["wall_time_s"], float),
            ))
    return rows


def provenance(config: SweepConfig) -> dict:
    return {
        "package_version": __version__,
        "config": config.to_dict(),
        "conventions": {
            "rotation": "exp(-i theta P / 2) for every parametrized gate",
            "amplitude_order": "little-endian (qubit 0 = least-significant bit)",
            "layer_time_order": "X rotations, then ZZ rotations in brickwall order",
            "vqs_depth": "3 moments per trainable layer; non-trainable initial layer excluded",
            "trotter_depth": "3 n + 2 moments (half B-steps merged between repetitions)",
            "boundary": "open chain, n_q - 1 ZZ bonds",
            "coefficient_range": list(COEFFICIENT_RANGE),
            "initial_layer_param_range": [float(v) for v in INITIAL_PARAM_RANGE],
            "rng": "numpy PCG64; SeedSequence(seed).spawn(2) -> (couplings, initial angles); "
                   "instance seed = SeedSequence([base_seed, n_q, index]).generate_state(1, uint64)",
            "fidelity": "evaluated at final time only against full diagonalisation",
            "vqs_restart": "each layer count integrates from theta = 0; a stiffness or step-budget "
                           "failure counts as a failed attempt",
            "classical_cost": "m = (2 n_q - 1) * ceil(D_vqs / 3), k = max(1, round((D_trotter - 2) / 3)), "
                              "both from the fitted depths at t_f = n_q",
        },
    }


def write_provenance(path: str | Path, config: SweepConfig) -> None:
    Path(path).write_text(json.dumps(provenance(config), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

CELL_HEADER = ["method", "n_qubits", "t_final", "n_rows", "n_solved", "mean_depth", "median_depth"]


def aggregate_cells(results: Iterable[RunResult]) -> list[dict]:
    """Per (method, n_q, t_f) mean and median depth over solved instances."""
    groups: dict[tuple, list[RunResult]] = {}
    for r in results:
        groups.setdefault((r.method, r.n_qubits, r.t_final), []).append(r)
    order = {m: i for i, m in enumerate(METHODS)}
    out = []
    for key in sorted(groups, key=lambda k: (order.get(k[0], len(order)), k[1], k[2])):
        rows = groups[key]
        depths = [r.min_depth for r in rows if r.solved]
        out.append({
            "method": key[0], "n_qubits": key[1], "t_final": key[2],
            "n_rows": len(rows), "n_solved": len(depths),
            "mean_depth": float(np.mean(depths)) if depths else None,
            "median_depth": float(median(depths)) if depths else None,
        })
    return out


def cells_to_csv(cells: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CELL_HEADER)
    for c in cells:
        writer.writerow([_fmt(c[k]) for k in CELL_HEADER])
    return buf.getvalue()
