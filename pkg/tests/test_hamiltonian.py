import numpy as np
import pytest
from scipy import stats

from vqsbench.hamiltonian import (IsingHamiltonian, PauliTerm, ProblemInstance, ResourceLimitError,
                                  apply_hamiltonian, dense_matrix, expectation_h, expectation_h2,
                                  random_instance)
from vqsbench.statevector import StateVector

from oracles import ising_matrix, random_state


def test_random_instance_counts():
    inst = random_instance(5, 11)
    h = inst.hamiltonian
    assert len(h.x_terms) == 5 and len(h.zz_terms) == 4
    assert inst.initial_layer_params.shape == (9,)
    assert all(-1 < t.coefficient < 1 for t in h.terms)
    assert np.all(np.abs(inst.initial_layer_params) < np.pi)


def test_smallest_chain():
    h = random_instance(2, 0).hamiltonian
    assert len(h.x_terms) == 2 and len(h.zz_terms) == 1


def test_random_instance_deterministic():
    a, b = random_instance(6, 123), random_instance(6, 123)
    assert a.to_dict() == b.to_dict()
    assert random_instance(6, 124).to_dict() != a.to_dict()


def test_random_instance_rejects_one_qubit():
    with pytest.raises(ValueError):
        random_instance(1, 0)


def test_zz_must_be_nearest_neighbour():
    with pytest.raises(ValueError):
        PauliTerm(0.1, "ZZ", (0, 2))


def test_json_roundtrip(tmp_path):
    inst = random_instance(4, 2**63 + 5)
    path = tmp_path / "inst.json"
    inst.save(path)
    back = ProblemInstance.load(path)
    assert back.to_dict() == inst.to_dict()
    assert back.seed == 2**63 + 5


def test_zero_hamiltonian():
    h = IsingHamiltonian.from_coefficients([0, 0, 0], [0, 0])
    psi = StateVector(3, random_state(np.random.default_rng(0), 3))
    assert np.all(apply_hamiltonian(h, psi).amplitudes == 0)
    assert expectation_h(h, psi) == 0 and expectation_h2(h, psi) == 0


def test_single_x_term_action():
    h = IsingHamiltonian.from_coefficients([1, 0], [0])
    out = apply_hamiltonian(h, StateVector.zero(2))
    np.testing.assert_allclose(out.amplitudes, StateVector.basis(2, 1).amplitudes)


def test_x_expectations_on_zero():
    h = IsingHamiltonian.from_coefficients([1.0], [])
    assert expectation_h(h, StateVector.zero(1)) == 0
    assert expectation_h2(h, StateVector.zero(1)) == 1


def test_dimension_mismatch():
    h = random_instance(3, 0).hamiltonian
    with pytest.raises(ValueError):
        apply_hamiltonian(h, StateVector.zero(2))


def test_dense_zz():
    m = dense_matrix(IsingHamiltonian.from_coefficients([0, 0], [1]))
    np.testing.assert_array_equal(m, np.diag([1, -1, -1, 1]))


def test_dense_x_spectrum():
    m = dense_matrix(IsingHamiltonian.from_coefficients([1, 0], [0]))
    np.testing.assert_allclose(np.linalg.eigvalsh(m), [-1, -1, 1, 1], atol=1e-14)


def test_dense_hermitian():
    m = dense_matrix(random_instance(5, 3).hamiltonian)
    assert np.linalg.norm(m - m.conj().T) <= 1e-14


def test_dense_guard():
    h = IsingHamiltonian.from_coefficients([0.1] * 13, [0.1] * 12)
    with pytest.raises(ResourceLimitError):
        dense_matrix(h)


def test_dense_matches_independent_kron():
    inst = random_instance(4, 9)
    h = inst.hamiltonian
    assert np.max(np.abs(dense_matrix(h) - ising_matrix(h.a, h.b))) <= 1e-14


@pytest.mark.parametrize("n", range(2, 7))
def test_apply_hamiltonian_vs_dense(n):
    rng = np.random.default_rng(n)
    for i in range(20):
        h = random_instance(n, 1000 * n + i).hamiltonian
        psi = random_state(rng, n)
        ref = ising_matrix(h.a, h.b) @ psi
        assert np.max(np.abs(apply_hamiltonian(h, StateVector(n, psi)).amplitudes - ref)) <= 1e-12


def test_expectations_vs_dense_and_variance():
    rng = np.random.default_rng(7)
    for i in range(100):
        n = int(rng.integers(2, 6))
        h = random_instance(n, i).hamiltonian
        psi = random_state(rng, n)
        dense = ising_matrix(h.a, h.b)
        s = StateVector(n, psi)
        e, e2 = expectation_h(h, s), expectation_h2(h, s)
        assert abs(e - np.vdot(psi, dense @ psi).real) <= 1e-10
        assert abs(e2 - np.vdot(psi, dense @ dense @ psi).real) <= 1e-10
        assert e2 >= e ** 2 - 1e-12


def test_coefficients_uniform_ks():
    draws = np.concatenate([
        np.concatenate([random_instance(5, s).hamiltonian.a, random_instance(5, s).hamiltonian.b])
        for s in range(1112)
    ])[:10_000]
    assert draws.size == 10_000
    result = stats.kstest(draws, stats.uniform(loc=-1, scale=2).cdf)
    # 1% critical value of the one-sample KS statistic
    assert result.statistic < 1.63 / np.sqrt(draws.size)
