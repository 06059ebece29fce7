import numpy as np
import pytest
from scipy.linalg import expm

from vqsbench.ansatz import initial_state
from vqsbench.exact import exact_evolve, fidelity
from vqsbench.hamiltonian import IsingHamiltonian, ProblemInstance, random_instance
from vqsbench.statevector import StateVector
from vqsbench.trotter import TrotterPlan, trotter_depth, trotter_evolve

from oracles import X, Z, pauli, random_state


def with_couplings(inst, a=None, b=None):
    h = inst.hamiltonian
    new = IsingHamiltonian.from_coefficients(h.a if a is None else a, h.b if b is None else b)
    return ProblemInstance(new, inst.initial_layer_params, inst.seed)


def test_plan_validation():
    with pytest.raises(ValueError):
        TrotterPlan(0, 1.0)
    with pytest.raises(ValueError):
        TrotterPlan(1, 0.0)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_commuting_blocks_exact_at_one_step(n):
    base = random_instance(n, 3)
    psi0 = initial_state(base)
    for inst in (with_couplings(base, b=np.zeros(n - 1)), with_couplings(base, a=np.zeros(n))):
        out = trotter_evolve(inst, TrotterPlan(1, 2.5), psi0)
        assert abs(fidelity(out, exact_evolve(inst, 2.5, psi0)) - 1) <= 1e-12
        assert np.max(np.abs(out.amplitudes - exact_evolve(inst, 2.5, psi0).amplitudes)) <= 1e-12


def test_one_step_vs_dense_exponentials():
    inst = random_instance(2, 8)
    a, b = inst.hamiltonian.a, inst.hamiltonian.b
    ha = a[0] * pauli(2, {0: X}) + a[1] * pauli(2, {1: X})
    hb = b[0] * pauli(2, {0: Z, 1: Z})
    t = 0.9
    u = expm(-0.5j * hb * t) @ expm(-1j * ha * t) @ expm(-0.5j * hb * t)
    psi = random_state(np.random.default_rng(0), 2)
    out = trotter_evolve(inst, TrotterPlan(1, t), StateVector(2, psi))
    assert np.max(np.abs(out.amplitudes - u @ psi)) <= 1e-12


def test_merged_steps_equal_repeated_strang():
    inst = random_instance(3, 2)
    h = inst.hamiltonian
    ha = sum(h.a[k] * pauli(3, {k: X}) for k in range(3))
    hb = sum(h.b[i] * pauli(3, {i: Z, i + 1: Z}) for i in range(2))
    t, n = 1.7, 4
    dt = t / n
    step = expm(-0.5j * hb * dt) @ expm(-1j * ha * dt) @ expm(-0.5j * hb * dt)
    psi = random_state(np.random.default_rng(1), 3)
    ref = np.linalg.matrix_power(step, n) @ psi
    out = trotter_evolve(inst, TrotterPlan(n, t), StateVector(3, psi))
    assert np.max(np.abs(out.amplitudes - ref)) <= 1e-12


def test_norm_preserved():
    rng = np.random.default_rng(4)
    for i in range(20):
        n = int(rng.integers(2, 7))
        out = trotter_evolve(random_instance(n, i), TrotterPlan(int(rng.integers(1, 30)), rng.uniform(0.1, 14)),
                             StateVector(n, random_state(rng, n)))
        assert abs(out.norm() - 1) <= 1e-12


def test_doubling_steps_quarters_error():
    inst = random_instance(3, 5)
    psi0 = initial_state(inst)
    exact = exact_evolve(inst, 2.0, psi0).amplitudes
    errs = [np.linalg.norm(trotter_evolve(inst, TrotterPlan(n, 2.0), psi0).amplitudes - exact)
            for n in (32, 64)]
    assert 4 * 0.8 <= errs[0] / errs[1] <= 4 * 1.2


def test_global_second_order_slope():
    ns = np.array([4, 8, 16, 32, 64])
    for seed in range(5):
        inst = random_instance(3, 40 + seed)
        psi0 = initial_state(inst)
        exact = exact_evolve(inst, 2.0, psi0).amplitudes
        errs = [np.linalg.norm(trotter_evolve(inst, TrotterPlan(int(n), 2.0), psi0).amplitudes - exact)
                for n in ns]
        slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
        assert -2.3 <= slope <= -1.7


def test_depth_formula():
    assert trotter_depth(TrotterPlan(1, 1.0)) == 5
    assert trotter_depth(TrotterPlan(2, 1.0)) == 8
    assert trotter_depth(TrotterPlan(10, 3.0)) == 32
    assert trotter_depth(TrotterPlan(2, 1.0), merged=False) == 10
