"""Hamiltonian Variational Ansatz on top of a generic Pauli-rotation circuit.

Each layer applies, in time order, one moment of X rotations on every qubit
followed by the ZZ rotations on all bonds laid out as a brickwall (even
bonds, then odd bonds).  Parameters are stored layer by layer with the
``n`` X angles first and the ``n - 1`` ZZ angles after them.

The reference state is ``|0...0>`` passed through one extra, non-trainable
layer whose angles come from the problem instance.  It is not counted in
the reported depth.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .hamiltonian import ProblemInstance
from .statevector import StateVector, _rx_, _rz_, _rzz_

MOMENTS_PER_LAYER = 3


@dataclass(frozen=True)
class Gate:
    kind: str  # "X", "Z" or "ZZ"
    qubits: tuple[int, ...]
    param: int


def _apply_gate_(arr: np.ndarray, n_qubits: int, gate: Gate, angle: float) -> None:
    if gate.kind == "X":
        _rx_(arr, n_qubits, gate.qubits[0], angle)
    elif gate.kind == "ZZ":
        _rzz_(arr, n_qubits, gate.qubits[0], gate.qubits[1], angle)
    elif gate.kind == "Z":
        _rz_(arr, n_qubits, gate.qubits[0], angle)
    else:
        raise ValueError(f"unknown gate kind {gate.kind!r}")


def brickwall_bonds(n_qubits: int) -> list[tuple[int, int]]:
    even = [(i, i + 1) for i in range(0, n_qubits - 1, 2)]
    odd = [(i, i + 1) for i in range(1, n_qubits - 1, 2)]
    return even + odd


def layer_gates(n_qubits: int, offset: int = 0, ordering: str = "brickwall") -> list[Gate]:
    """Gates of one HVA layer in time order, parameters numbered from ``offset``."""
    gates = [Gate("X", (q,), offset + q) for q in range(n_qubits)]
    if ordering == "brickwall":
        bonds = brickwall_bonds(n_qubits)
    elif ordering == "sequential":
        bonds = [(i, i + 1) for i in range(n_qubits - 1)]
    else:
        raise ValueError(f"unknown ZZ ordering {ordering!r}")
    gates += [Gate("ZZ", (i, j), offset + n_qubits + i) for i, j in bonds]
    return gates


class RotationCircuit:
    """Sequence of Pauli rotations ``exp(-i theta_k P_k / 2)`` on a fixed reference state.

    Every parameter drives exactly one gate.
    """

    def __init__(self, n_qubits: int, gates: Sequence[Gate], reference: StateVector | None = None):
        self.n_qubits = n_qubits
        self.gates = tuple(gates)
        self.n_params = len(self.gates)
        if sorted(g.param for g in self.gates) != list(range(self.n_params)):
            raise ValueError("each parameter must drive exactly one gate")
        self._reference = reference

    @property
    def reference_state(self) -> StateVector:
        if self._reference is None:
            return StateVector.zero(self.n_qubits)
        return self._reference

    def _check_params(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {params.shape}")
        return params

    def prepare_state(self, params) -> StateVector:
        params = self._check_params(params)
        arr = self.reference_state.amplitudes.copy()
        for g in self.gates:
            _apply_gate_(arr, self.n_qubits, g, params[g.param])
        return StateVector(self.n_qubits, arr)

    def derivative_state(self, params, k: int) -> StateVector:
        """d|psi>/d theta_k as half of the circuit with theta_k shifted by pi."""
        params = self._check_params(params)
        if not 0 <= k < self.n_params:
            raise IndexError(f"parameter index {k} out of range for {self.n_params} parameters")
        shifted = params.copy()
        shifted[k] += np.pi
        arr = self.reference_state.amplitudes.copy()
        for g in self.gates:
            _apply_gate_(arr, self.n_qubits, g, shifted[g.param])
        return StateVector(self.n_qubits, 0.5 * arr)

    def state_and_jacobian(self, params) -> tuple[np.ndarray, np.ndarray]:
        """Return ``psi`` and the (m, 2^n) array whose row k is d|psi>/d theta_k.

        One forward sweep: when gate g is reached, its shifted copy starts a
        new derivative row; every later gate is applied to the whole batch.
        """
        params = self._check_params(params)
        m, n = self.n_params, self.n_qubits
        rows = np.empty((m + 1, 1 << n), dtype=np.complex128)
        rows[0] = self.reference_state.amplitudes
        for t, g in enumerate(self.gates):
            theta = params[g.param]
            rows[t + 1] = rows[0]
            _apply_gate_(rows[t + 1], n, g, theta + np.pi)
            rows[t + 1] *= 0.5
            _apply_gate_(rows[: t + 1], n, g, theta)
        jac = np.empty((m, 1 << n), dtype=np.complex128)
        for t, g in enumerate(self.gates):
            jac[g.param] = rows[t + 1]
        return rows[0], jac


class HvaAnsatz(RotationCircuit):
    def __init__(self, instance: ProblemInstance, n_layers: int, ordering: str = "brickwall"):
        if n_layers < 1:
            raise ValueError(f"n_layers must be positive, got {n_layers}")
        n = instance.n_qubits
        self.instance = instance
        self.n_layers = n_layers
        self.params_per_layer = 2 * n - 1
        self.ordering = ordering
        gates = []
        for layer in range(n_layers):
            gates += layer_gates(n, layer * self.params_per_layer, ordering)
        super().__init__(n, gates)

    @cached_property
    def initial_state(self) -> StateVector:
        n = self.n_qubits
        arr = StateVector.zero(n).amplitudes.copy()
        theta0 = self.instance.initial_layer_params
        for g in layer_gates(n, 0, self.ordering):
            _apply_gate_(arr, n, g, theta0[g.param])
        return StateVector(n, arr)

    @property
    def reference_state(self) -> StateVector:
        return self.initial_state

    def circuit_depth(self) -> int:
        return circuit_depth(self)


def initial_state(instance: ProblemInstance) -> StateVector:
    """Reference state shared by the variational and product-formula runs."""
    return HvaAnsatz(instance, 1).initial_state


def prepare_state(ansatz: RotationCircuit, params) -> StateVector:
    return ansatz.prepare_state(params)


def derivative_state(ansatz: RotationCircuit, params, k: int) -> StateVector:
    return ansatz.derivative_state(params, k)


def circuit_depth(ansatz: HvaAnsatz) -> int:
    # one X moment plus two brickwall ZZ moments per trainable layer
    return MOMENTS_PER_LAYER * ansatz.n_layers
