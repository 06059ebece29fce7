"""Open-chain transverse-field Ising model and random problem instances.

    H = sum_k a_k X_k + sum_i b_i Z_i Z_{i+1}   (H^A + H^B)

Random instances draw the couplings uniformly from (-1, 1) and the fixed
first-layer angles uniformly from (-pi, pi).  Reproducibility rests on
numpy's PCG64 seeded through ``SeedSequence(seed)``; the sequence is split
with ``spawn(2)`` into one child stream for the couplings (a then b) and
one for the initial-layer angles.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .statevector import StateVector, _flip_index, zz_signs

MAX_DENSE_QUBITS = 12
INITIAL_PARAM_RANGE = (-np.pi, np.pi)
COEFFICIENT_RANGE = (-1.0, 1.0)


class ResourceLimitError(RuntimeError):
    """Raised when a dense construction would exceed the memory guard."""


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    kind: str  # "X" or "ZZ"
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind == "X":
            if len(self.qubits) != 1:
                raise ValueError("X term acts on exactly one qubit")
        elif self.kind == "ZZ":
            if len(self.qubits) != 2:
                raise ValueError("ZZ term acts on exactly two qubits")
            i, j = self.qubits
            if j != i + 1:
                raise ValueError(f"ZZ term must couple neighbours (i, i+1), got {self.qubits}")
        else:
            raise ValueError(f"unknown Pauli kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class IsingHamiltonian:
    n_qubits: int
    x_terms: tuple[PauliTerm, ...]
    zz_terms: tuple[PauliTerm, ...]

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if len(self.x_terms) != self.n_qubits or len(self.zz_terms) != self.n_qubits - 1:
            raise ValueError(
                f"open chain of {self.n_qubits} qubits needs {self.n_qubits} X terms and "
                f"{self.n_qubits - 1} ZZ terms, got {len(self.x_terms)} and {len(self.zz_terms)}"
            )
        for k, t in enumerate(self.x_terms):
            if t.kind != "X" or t.qubits != (k,):
                raise ValueError(f"x_terms[{k}] must be an X term on qubit {k}")
        for k, t in enumerate(self.zz_terms):
            if t.kind != "ZZ" or t.qubits != (k, k + 1):
                raise ValueError(f"zz_terms[{k}] must be a ZZ term on bond ({k}, {k + 1})")

    @classmethod
    def from_coefficients(cls, a: Sequence[float], b: Sequence[float]) -> "IsingHamiltonian":
        a = [float(v) for v in a]
        b = [float(v) for v in b]
        x_terms = tuple(PauliTerm(v, "X", (k,)) for k, v in enumerate(a))
        zz_terms = tuple(PauliTerm(v, "ZZ", (k, k + 1)) for k, v in enumerate(b))
        return cls(len(a), x_terms, zz_terms)

    @property
    def a(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.x_terms])

    @property
    def b(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.zz_terms])

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return self.x_terms + self.zz_terms

    @cached_property
    def zz_diagonal(self) -> np.ndarray:
        """Diagonal of H^B in the computational basis."""
        diag = np.zeros(1 << self.n_qubits)
        for t in self.zz_terms:
            diag += t.coefficient * zz_signs(self.n_qubits, *t.qubits)
        return diag

    def _apply(self, arr: np.ndarray) -> np.ndarray:
        # batched: last axis holds amplitudes
        out = self.zz_diagonal * arr
        for t in self.x_terms:
            if t.coefficient != 0.0:
                out += t.coefficient * arr[..., _flip_index(self.n_qubits, t.qubits[0])]
        return out


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    hamiltonian: IsingHamiltonian
    initial_layer_params: np.ndarray
    seed: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        params = np.asarray(self.initial_layer_params, dtype=float)
        expected = 2 * self.n_qubits - 1
        if params.shape != (expected,):
            raise ValueError(f"expected {expected} initial-layer parameters, got {params.shape}")
        object.__setattr__(self, "initial_layer_params", params)

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "seed": self.seed,
            "a": self.hamiltonian.a.tolist(),
            "b": self.hamiltonian.b.tolist(),
            "initial_layer_params": self.initial_layer_params.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemInstance":
        h = IsingHamiltonian.from_coefficients(data["a"], data["b"])
        if h.n_qubits != int(data["n_qubits"]):
            raise ValueError("n_qubits does not match the length of 'a'")
        seed = data.get("seed")
        return cls(h, np.array(data["initial_layer_params"], dtype=float),
                   None if seed is None else int(seed))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ProblemInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _open_uniform(rng: np.random.Generator, low: float, high: float, size: int) -> np.ndarray:
    # Generator.uniform samples [low, high); redraw the (measure-zero) left endpoint
    out = rng.uniform(low, high, size)
    while np.any(out == low):
        bad = out == low
        out[bad] = rng.uniform(low, high, int(bad.sum()))
    return out


def random_instance(n_qubits: int, seed: int) -> ProblemInstance:
    """Draw a reproducible Ising instance and its fixed first-layer angles."""
    if n_qubits < 2:
        raise ValueError(f"random instances need at least 2 qubits, got {n_qubits}")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    coeff_seq, param_seq = np.random.SeedSequence(seed).spawn(2)
    coeff_rng = np.random.Generator(np.random.PCG64(coeff_seq))
    param_rng = np.random.Generator(np.random.PCG64(param_seq))
    a = _open_uniform(coeff_rng, *COEFFICIENT_RANGE, n_qubits)
    b = _open_uniform(coeff_rng, *COEFFICIENT_RANGE, n_qubits - 1)
    theta0 = _open_uniform(param_rng, *INITIAL_PARAM_RANGE, 2 * n_qubits - 1)
    return ProblemInstance(IsingHamiltonian.from_coefficients(a, b), theta0, seed)


def _check_dims(h: IsingHamiltonian, state: StateVector) -> None:
    if h.n_qubits != state.n_qubits:
        raise ValueError(f"Hamiltonian on {h.n_qubits} qubits applied to {state.n_qubits}-qubit state")


def apply_hamiltonian(h: IsingHamiltonian, state: StateVector) -> StateVector:
    _check_dims(h, state)
    return StateVector(state.n_qubits, h._apply(state.amplitudes))


def expectation_h(h: IsingHamiltonian, state: StateVector) -> float:
    _check_dims(h, state)
    return float(np.vdot(state.amplitudes, h._apply(state.amplitudes)).real)


def expectation_h2(h: IsingHamiltonian, state: StateVector) -> float:
    """<psi|H^2|psi> evaluated as ||H psi||^2 (H is Hermitian)."""
    _check_dims(h, state)
    hpsi = h._apply(state.amplitudes)
    return float(np.vdot(hpsi, hpsi).real)


_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def _embed(n_qubits: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    # kron(op_{n-1}, ..., op_0): qubit 0 is the least-significant bit
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(n_qubits)):
        out = np.kron(out, ops.get(q, np.eye(2)))
    return out


def dense_matrix(h: IsingHamiltonian) -> np.ndarray:
    """Full 2^n x 2^n matrix built from Kronecker products."""
    n = h.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise ResourceLimitError(f"dense matrix for {n} qubits exceeds the {MAX_DENSE_QUBITS}-qubit guard")
    mat = np.zeros((1 << n, 1 << n), dtype=np.complex128)
    for t in h.x_terms:
        mat += t.coefficient * _embed(n, {t.qubits[0]: _PAULI_X})
    for t in h.zz_terms:
        i, j = t.qubits
        mat += t.coefficient * _embed(n, {i: _PAULI_Z, j: _PAULI_Z})
    return mat
