"""McLachlan variational time evolution of ansatz parameters.

At every right-hand-side evaluation the geometric tensor A and force vector
C are assembled from statevector overlaps, ``A theta_dot = C`` is solved in
the minimum-norm least-squares sense, and the resulting parameter velocity
is fed to an adaptive Dormand-Prince 4(5) integrator.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

from .ansatz import RotationCircuit
from .hamiltonian import IsingHamiltonian

log = logging.getLogger(__name__)

DISTANCE_FLOOR = -1e-8
MIN_STEP = 1e-12


class NumericalConsistencyError(ArithmeticError):
    """McLachlan distance came out clearly negative: A/C assembly is broken."""


class StiffnessError(RuntimeError):
    """Adaptive step size collapsed; carries the partial trajectory."""

    def __init__(self, message: str, trajectory: "VqsTrajectory"):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class VqsConfig:
    ode_rel_tol: float = 1e-3
    ode_abs_tol: float = 1e-6
    max_step: float = np.inf
    # None -> numpy's default rcond: machine epsilon * max(A.shape)
    lstsq_rcond: float | None = None
    max_steps: int | None = None

    def __post_init__(self):
        if self.ode_rel_tol <= 0 or self.ode_abs_tol <= 0 or self.max_step <= 0:
            raise ValueError("integrator tolerances and max_step must be strictly positive")

    def to_dict(self) -> dict:
        return {
            "ode_rel_tol": self.ode_rel_tol,
            "ode_abs_tol": self.ode_abs_tol,
            "max_step": None if np.isinf(self.max_step) else self.max_step,
            "lstsq_rcond": self.lstsq_rcond,
            "max_steps": self.max_steps,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VqsConfig":
        data = dict(data)
        if data.get("max_step") is None:
            data["max_step"] = np.inf
        return cls(**data)


@dataclass(frozen=True, eq=False)
class GeometrySystem:
    a_matrix: np.ndarray
    c_vector: np.ndarray
    h2_expectation: float
    h_expectation: float = 0.0


@dataclass
class VqsTrajectory:
    times: list[float] = field(default_factory=list)
    params: list[np.ndarray] = field(default_factory=list)
    mclachlan_distance: list[float] = field(default_factory=list)
    step_count: int = 0
    rhs_evaluations: int = 0

    @property
    def final_params(self) -> np.ndarray:
        return self.params[-1]

    def to_dict(self) -> dict:
        return {
            "times": list(self.times),
            "params": [p.tolist() for p in self.params],
            "mclachlan": list(self.mclachlan_distance),
            "step_count": self.step_count,
            "rhs_evaluations": self.rhs_evaluations,
        }


def _hamiltonian_of(ansatz, hamiltonian: IsingHamiltonian | None) -> IsingHamiltonian:
    if hamiltonian is not None:
        return hamiltonian
    try:
        return ansatz.instance.hamiltonian
    except AttributeError:
        raise ValueError("a Hamiltonian is required for circuits not built from an instance") from None


def build_geometry(ansatz: RotationCircuit, params, hamiltonian: IsingHamiltonian | None = None) -> GeometrySystem:
    """Assemble A_ij = Re(<d_i|d_j> - <d_i|psi><psi|d_j>) and
    C_i = Im(<d_i|H|psi> + <psi|d_i><psi|H|psi>)."""
    h = _hamiltonian_of(ansatz, hamiltonian)
    psi, jac = ansatz.state_and_jacobian(params)
    hpsi = h._apply(psi)
    energy = float(np.vdot(psi, hpsi).real)
    h2 = float(np.vdot(hpsi, hpsi).real)

    jac_conj = jac.conj()
    overlap = jac_conj @ psi  # <d_i|psi>
    gram = jac_conj @ jac.T
    a = (gram - np.outer(overlap, overlap.conj())).real
    # upper triangle mirrored: exactly symmetric
    a = np.triu(a) + np.triu(a, 1).T
    c = (jac_conj @ hpsi + overlap.conj() * energy).imag
    return GeometrySystem(a, c, h2, energy)


def solve_parameter_velocities(system: GeometrySystem, rcond: float | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution of A theta_dot = C (SVD, relative cutoff)."""
    a, c = system.a_matrix, system.c_vector
    if a.size == 0:
        return np.zeros(0)
    theta_dot, *_ = np.linalg.lstsq(a, c, rcond=rcond)
    return theta_dot


def mclachlan_distance(system: GeometrySystem, theta_dot) -> float:
    """theta_dot^T A theta_dot - 2 C.theta_dot + <H^2>, floored at 0 for tiny negatives."""
    theta_dot = np.asarray(theta_dot, dtype=float)
    if theta_dot.shape != system.c_vector.shape:
        raise ValueError(f"theta_dot shape {theta_dot.shape} does not match C {system.c_vector.shape}")
    raw = float(theta_dot @ system.a_matrix @ theta_dot - 2.0 * system.c_vector @ theta_dot
                + system.h2_expectation)
    if raw < DISTANCE_FLOOR:
        raise NumericalConsistencyError(f"McLachlan distance {raw:.3e} is negative")
    return max(raw, 0.0)


def integrate(ansatz: RotationCircuit, config: VqsConfig, t_final: float,
              hamiltonian: IsingHamiltonian | None = None) -> VqsTrajectory:
    """Integrate theta(t) from theta(0) = 0 up to ``t_final``."""
    if not t_final > 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    h = _hamiltonian_of(ansatz, hamiltonian)
    traj = VqsTrajectory()
    last: dict = {}

    def rhs(t, theta):
        traj.rhs_evaluations += 1
        system = build_geometry(ansatz, theta, h)
        theta_dot = solve_parameter_velocities(system, config.lstsq_rcond)
        last["key"] = theta.tobytes()
        last["system"], last["theta_dot"] = system, theta_dot
        return theta_dot

    def record(t, theta):
        if last.get("key") != theta.tobytes():
            rhs(t, theta)
        traj.times.append(float(t))
        traj.params.append(np.array(theta, dtype=float))
        traj.mclachlan_distance.append(mclachlan_distance(last["system"], last["theta_dot"]))

    theta0 = np.zeros(ansatz.n_params)
    record(0.0, theta0)
    solver = RK45(rhs, 0.0, theta0, t_final, max_step=config.max_step,
                  rtol=config.ode_rel_tol, atol=config.ode_abs_tol)
    while solver.status == "running":
        t_prev = solver.t
        message = solver.step()
        if solver.status == "failed":
            raise StiffnessError(f"integrator failed at t={solver.t:.6g}: {message}", traj)
        traj.step_count += 1
        record(solver.t, solver.y)
        if solver.t < t_final and solver.t - t_prev < MIN_STEP:
            raise StiffnessError(f"step size {solver.t - t_prev:.3e} below {MIN_STEP} at t={solver.t:.6g}", traj)
        if config.max_steps is not None and traj.step_count >= config.max_steps and solver.status == "running":
            raise StiffnessError(f"step budget of {config.max_steps} exhausted at t={solver.t:.6g}", traj)
    log.debug("integrated %d params to t=%g in %d steps (%d rhs)",
              ansatz.n_params, t_final, traj.step_count, traj.rhs_evaluations)
    return traj
