"""Second-order (Strang) product formula for H = H^A + H^B.

One repetition is B(dt/2) A(dt) B(dt/2).  Consecutive half B-blocks are
merged, so n repetitions execute

    B(dt/2) A(dt) [B(dt) A(dt)]^(n-1) B(dt/2),     dt = t / n.

A-blocks are a single moment of parallel X rotations with angle 2 a_k dt;
B-blocks are two brickwall moments of ZZ rotations with angle 2 b_i dt.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import brickwall_bonds
from .hamiltonian import ProblemInstance
from .statevector import StateVector, _rx_, _rzz_

X_MOMENTS = 1
ZZ_MOMENTS = 2


@dataclass(frozen=True)
class TrotterPlan:
    n_steps: int
    t_final: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if not self.t_final > 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps


def _x_block_(arr, n, a, tau):
    for q in range(n):
        _rx_(arr, n, q, 2.0 * a[q] * tau)


def _zz_block_(arr, n, b, tau):
    for i, j in brickwall_bonds(n):
        _rzz_(arr, n, i, j, 2.0 * b[i] * tau)


def trotter_evolve(instance: ProblemInstance, plan: TrotterPlan, initial_state: StateVector) -> StateVector:
    h = instance.hamiltonian
    n = h.n_qubits
    if initial_state.n_qubits != n:
        raise ValueError(f"state has {initial_state.n_qubits} qubits, instance {n}")
    a, b = h.a, h.b
    dt = plan.dt
    arr = initial_state.amplitudes.copy()
    _zz_block_(arr, n, b, dt / 2)
    _x_block_(arr, n, a, dt)
    for _ in range(plan.n_steps - 1):
        _zz_block_(arr, n, b, dt)
        _x_block_(arr, n, a, dt)
    _zz_block_(arr, n, b, dt / 2)
    return StateVector(n, arr)


def trotter_depth(plan: TrotterPlan, merged: bool = True) -> int:
    """Moments in the circuit: 3n + 2 with merged half steps, 5n without."""
    n = plan.n_steps
    if merged:
        return n * X_MOMENTS + (n + 1) * ZZ_MOMENTS
    return n * (X_MOMENTS + 2 * ZZ_MOMENTS)
