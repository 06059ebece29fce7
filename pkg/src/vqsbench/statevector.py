"""Dense statevector and the gate kernels used by every other module.

Amplitudes are little-endian: qubit ``q`` is bit ``q`` of the basis index.
All parametrized rotations use the half-angle convention
``exp(-i * angle * P / 2)``.

The public functions take and return :class:`StateVector`.  The underscore
kernels operate on raw arrays whose *last* axis is the amplitude axis, so the
same code transforms a single state or a whole batch of derivative states.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


# ---------------------------------------------------------------------------
# index tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _flip_index(n_qubits: int, qubit: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits)
    out = idx ^ (1 << qubit)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def z_signs(n_qubits: int, qubit: int) -> np.ndarray:
    """Eigenvalue of Z_qubit (+1 for bit 0, -1 for bit 1) on every basis state."""
    idx = np.arange(1 << n_qubits)
    out = 1.0 - 2.0 * ((idx >> qubit) & 1)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def zz_signs(n_qubits: int, qubit_a: int, qubit_b: int) -> np.ndarray:
    out = z_signs(n_qubits, qubit_a) * z_signs(n_qubits, qubit_b)
    out.flags.writeable = False
    return out


def _check_qubit(n_qubits: int, qubit: int) -> None:
    if not 0 <= qubit < n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {n_qubits} qubits")


def _check_pair(n_qubits: int, qubit_a: int, qubit_b: int) -> None:
    _check_qubit(n_qubits, qubit_a)
    _check_qubit(n_qubits, qubit_b)
    if qubit_a == qubit_b:
        raise IndexError(f"two-qubit gate needs distinct qubits, got {qubit_a} twice")


# ---------------------------------------------------------------------------
# array kernels (last axis = amplitudes, operate in place)
# ---------------------------------------------------------------------------

def _rx_(arr: np.ndarray, n_qubits: int, qubit: int, angle: float) -> None:
    flipped = arr[..., _flip_index(n_qubits, qubit)]
    arr *= np.cos(angle / 2)
    arr += (-1j * np.sin(angle / 2)) * flipped


def _rz_(arr: np.ndarray, n_qubits: int, qubit: int, angle: float) -> None:
    arr *= np.exp(-0.5j * angle * z_signs(n_qubits, qubit))


def _rzz_(arr: np.ndarray, n_qubits: int, qubit_a: int, qubit_b: int, angle: float) -> None:
    arr *= np.exp(-0.5j * angle * zz_signs(n_qubits, qubit_a, qubit_b))


# ---------------------------------------------------------------------------
# public gate API
# ---------------------------------------------------------------------------

def apply_rx(state: StateVector, qubit: int, angle: float) -> StateVector:
    """exp(-i * angle * X_qubit / 2) |state>."""
    _check_qubit(state.n_qubits, qubit)
    out = state.amplitudes.copy()
    _rx_(out, state.n_qubits, qubit, angle)
    return StateVector(state.n_qubits, out)


def apply_rz(state: StateVector, qubit: int, angle: float) -> StateVector:
    """exp(-i * angle * Z_qubit / 2) |state>."""
    _check_qubit(state.n_qubits, qubit)
    out = state.amplitudes.copy()
    _rz_(out, state.n_qubits, qubit, angle)
    return StateVector(state.n_qubits, out)


def apply_rzz(state: StateVector, qubit_a: int, qubit_b: int, angle: float) -> StateVector:
    """exp(-i * angle * Z_a Z_b / 2) |state>."""
    _check_pair(state.n_qubits, qubit_a, qubit_b)
    out = state.amplitudes.copy()
    _rzz_(out, state.n_qubits, qubit_a, qubit_b, angle)
    return StateVector(state.n_qubits, out)


def apply_pauli_string(state: StateVector, term) -> StateVector:
    """Return ``coefficient * P |state>`` for a one-body X or two-body ZZ term.

    The result is generally not normalized.
    """
    n = state.n_qubits
    if term.kind == "X":
        (q,) = term.qubits
        _check_qubit(n, q)
        out = term.coefficient * state.amplitudes[_flip_index(n, q)]
    elif term.kind == "ZZ":
        qa, qb = term.qubits
        _check_pair(n, qa, qb)
        out = term.coefficient * zz_signs(n, qa, qb) * state.amplitudes
    else:
        raise ValueError(f"unsupported Pauli kind {term.kind!r}")
    return StateVector(n, out)


def inner_product(bra: StateVector, ket: StateVector) -> complex:
    """<bra|ket>, conjugating the bra."""
    if bra.n_qubits != ket.n_qubits:
        raise ValueError(f"dimension mismatch: {bra.n_qubits} vs {ket.n_qubits} qubits")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))
