"""Exact time evolution by full diagonalisation, and state fidelity."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .hamiltonian import IsingHamiltonian, MAX_DENSE_QUBITS, ResourceLimitError, dense_matrix
from .statevector import StateVector


class Eigensystem:
    """H = V diag(w) V^dagger, reusable for any evolution time."""

    def __init__(self, h: IsingHamiltonian):
        if h.n_qubits > MAX_DENSE_QUBITS:
            raise ResourceLimitError(f"exact evolution limited to {MAX_DENSE_QUBITS} qubits, got {h.n_qubits}")
        self.n_qubits = h.n_qubits
        self.energies, self.vectors = np.linalg.eigh(dense_matrix(h))

    def evolve(self, state: StateVector, t: float) -> StateVector:
        if state.n_qubits != self.n_qubits:
            raise ValueError(f"state has {state.n_qubits} qubits, Hamiltonian {self.n_qubits}")
        if t < 0:
            raise ValueError(f"evolution time must be nonnegative, got {t}")
        if t == 0:
            return state.copy()
        coeffs = self.vectors.conj().T @ state.amplitudes
        coeffs *= np.exp(-1j * self.energies * t)
        return StateVector(self.n_qubits, self.vectors @ coeffs)


@lru_cache(maxsize=256)
def _eigensystem_for(key: tuple) -> Eigensystem:
    a, b = key
    return Eigensystem(IsingHamiltonian.from_coefficients(a, b))


def eigensystem(h: IsingHamiltonian) -> Eigensystem:
    # keyed on coefficient values so equal Hamiltonians share one decomposition
    return _eigensystem_for((tuple(h.a.tolist()), tuple(h.b.tolist())))


def exact_evolve(instance_or_h, t: float, initial_state: StateVector) -> StateVector:
    """e^{-iHt} |initial_state>."""
    h = getattr(instance_or_h, "hamiltonian", instance_or_h)
    return eigensystem(h).evolve(initial_state, t)


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
