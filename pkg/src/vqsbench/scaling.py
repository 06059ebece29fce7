"""Power-law depth fits, the VQS/Trotter equal-depth boundary and the
classical-cost threshold, plus the CSV/JSON files that carry them."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .harness import TROTTER, VQS, RunResult, _fmt, aggregate_cells, cells_to_csv

DEPTH_PER_LAYER = 3
DEPTH_PER_TROTTER_STEP = 3
TROTTER_DEPTH_OFFSET = 2
DEGENERATE_TOL = 1e-12


class InsufficientDataError(ValueError):
    def __init__(self, message: str, n_rows: int):
        super().__init__(message)
        self.n_rows = n_rows


class DegenerateBoundaryError(ValueError):
    pass


@dataclass(frozen=True)
class FitParams:
    """D(n_q, t_f) = a * n_q**b * t_f**c."""

    method: str
    a: float
    b: float
    c: float
    se_a: float = 0.0
    se_b: float = 0.0
    se_c: float = 0.0
    n_rows: int = 0
    rms_log_residual: float = 0.0
    n_excluded: int = 0

    @property
    def std_errors(self) -> tuple[float, float, float]:
        return (self.se_a, self.se_b, self.se_c)

    def depth(self, n_qubits, t_final):
        return self.a * np.power(n_qubits, self.b) * np.power(t_final, self.c)

    def to_dict(self) -> dict:
        return {
            "method": self.method, "a": self.a, "b": self.b, "c": self.c,
            "se_a": self.se_a, "se_b": self.se_b, "se_c": self.se_c,
            "n_rows": self.n_rows, "rms_log_residual": self.rms_log_residual,
            "n_excluded": self.n_excluded,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FitParams":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


# values reported for the 50-instance, n_q 2-10, t_f 1-14 benchmark
PUBLISHED_FITS = {
    VQS: FitParams(VQS, 1.587, 0.997, 0.743, 0.152, 0.035, 0.028),
    TROTTER: FitParams(TROTTER, 3.469, 0.451, 1.287, 0.162, 0.011, 0.017),
}


def fit_power_law(rows: Iterable[RunResult], method: str) -> FitParams:
    """Ordinary least squares of log D on (1, log n_q, log t_f).

    Only solved rows of ``method`` with n_q > 0 and t_f >= 1 enter the fit.
    """
    selected = [r for r in rows if r.method == method]
    used = [r for r in selected
            if r.status == "success" and r.n_qubits > 0 and r.t_final >= 1 and r.min_depth > 0]
    n_excluded = len(selected) - len(used)
    pairs = {(r.n_qubits, r.t_final) for r in used}
    if len(pairs) < 4:
        raise InsufficientDataError(
            f"{method}: need >= 4 distinct (n_q, t_f) points, found {len(pairs)} in {len(used)} rows",
            len(used))
    n_q = np.array([r.n_qubits for r in used], dtype=float)
    t_f = np.array([r.t_final for r in used], dtype=float)
    depth = np.array([r.min_depth for r in used], dtype=float)
    design = np.column_stack([np.ones_like(n_q), np.log(n_q), np.log(t_f)])
    if np.linalg.matrix_rank(design) < 3:
        raise InsufficientDataError(
            f"{method}: n_q and t_f must each take at least two values", len(used))
    y = np.log(depth)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = len(y) - 3
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(design.T @ design)
    se = np.sqrt(np.diag(cov))
    a = math.exp(coef[0])
    return FitParams(method, a, float(coef[1]), float(coef[2]),
                     se_a=a * float(se[0]), se_b=float(se[1]), se_c=float(se[2]),
                     n_rows=len(used), rms_log_residual=float(np.sqrt(np.mean(resid ** 2))),
                     n_excluded=n_excluded)


def write_fits(path: str | Path, fits: Sequence[FitParams]) -> None:
    Path(path).write_text(json.dumps([f.to_dict() for f in fits], indent=2) + "\n")


def read_fits(path: str | Path) -> dict[str, FitParams]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    return {d["method"]: FitParams.from_dict(d) for d in data}


# ---------------------------------------------------------------------------
# advantage boundary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Boundary:
    """Equal-depth curve t_f*(n_q) = kappa * n_q**gamma.

    ``vqs_side`` is "above" (VQS shallower for t_f > t_f*), "below",
    "everywhere" or "nowhere"; the last two come with an empty curve.
    """

    n_qubits: np.ndarray
    t_f_star: np.ndarray
    vqs_side: str
    kappa: float | None = None
    gamma: float | None = None

    def vqs_advantage(self, n_qubits: float, t_final: float) -> bool:
        if self.vqs_side in ("everywhere", "nowhere"):
            return self.vqs_side == "everywhere"
        star = self.kappa * n_qubits ** self.gamma
        return t_final > star if self.vqs_side == "above" else t_final < star


def advantage_boundary(fit_vqs: FitParams, fit_trotter: FitParams, n_q_grid) -> Boundary:
    n_q = np.asarray(list(n_q_grid), dtype=float)
    a1, b1, c1 = fit_vqs.a, fit_vqs.b, fit_vqs.c
    a2, b2, c2 = fit_trotter.a, fit_trotter.b, fit_trotter.c
    if abs(c1 - c2) <= DEGENERATE_TOL:
        if abs(b1 - b2) <= DEGENERATE_TOL:
            side = "everywhere" if a1 < a2 else "nowhere"
            return Boundary(np.array([]), np.array([]), side)
        raise DegenerateBoundaryError("time exponents coincide: no t_f boundary exists")
    kappa = (a2 / a1) ** (1.0 / (c1 - c2))
    gamma = (b2 - b1) / (c1 - c2)
    t_star = kappa * n_q ** gamma
    # probe just above the curve at n_q = 1 (or the first grid point)
    n_probe = float(n_q[0]) if n_q.size else 1.0
    t_probe = 2.0 * kappa * n_probe ** gamma
    side = "above" if fit_vqs.depth(n_probe, t_probe) < fit_trotter.depth(n_probe, t_probe) else "below"
    return Boundary(n_q, t_star, side, kappa, gamma)


def write_boundary(path: str | Path, boundary: Boundary) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n_qubits", "t_f_star"])
    for n, t in zip(boundary.n_qubits, boundary.t_f_star):
        writer.writerow([_fmt(float(n)), _fmt(float(t))])
    Path(path).write_text(buf.getvalue())


# ---------------------------------------------------------------------------
# classical-cost threshold
# ---------------------------------------------------------------------------

def vqs_parameter_count(fit_vqs: FitParams, n_qubits: int) -> int:
    """m at t_f = n_q: (2 n_q - 1) parameters per layer times the fitted layer count."""
    layers = math.ceil(fit_vqs.depth(n_qubits, n_qubits) / DEPTH_PER_LAYER)
    return (2 * n_qubits - 1) * max(layers, 1)


def trotter_step_count(fit_trotter: FitParams, n_qubits: int) -> int:
    """k at t_f = n_q, inverting depth = 3 k + 2."""
    depth = fit_trotter.depth(n_qubits, n_qubits)
    return max(1, round((depth - TROTTER_DEPTH_OFFSET) / DEPTH_PER_TROTTER_STEP))


def classical_cost_threshold(fit_vqs: FitParams, fit_trotter: FitParams, p: float,
                             n_q_search_range: Iterable[int] = range(2, 41)) -> int | None:
    """Smallest n_q with p * m^3 < k * 2^n_q, or None inside the search range."""
    if p < 0:
        raise ValueError(f"prefactor p must be nonnegative, got {p}")
    for n in sorted(n_q_search_range):
        m = vqs_parameter_count(fit_vqs, n)
        k = trotter_step_count(fit_trotter, n)
        # exact integer arithmetic on the right-hand side
        if p * m ** 3 < k * 2 ** n:
            return n
    return None


def threshold_curve(fit_vqs: FitParams, fit_trotter: FitParams, p_values: Iterable[float],
                    n_q_search_range: Iterable[int] = range(2, 41)) -> list[tuple[float, int | None]]:
    search = list(n_q_search_range)
    return [(float(p), classical_cost_threshold(fit_vqs, fit_trotter, p, search)) for p in p_values]


def write_thresholds(path: str | Path, curve: Iterable[tuple[float, int | None]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", "n_q_threshold"])
    for p, n in curve:
        writer.writerow([_fmt(p), _fmt(n)])
    Path(path).write_text(buf.getvalue())


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------

PLOT_FILES = ("depth_vs_nq.csv", "depth_vs_tf.csv", "boundary.csv", "threshold.csv")


def emit_plot_data(out_dir: str | Path, rows: Sequence[RunResult],
                   boundary: Boundary | None = None,
                   thresholds: Iterable[tuple[float, int | None]] = ()) -> list[Path]:
    """Write the four plot-ready CSV files into ``out_dir``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    cells = aggregate_cells(rows)
    diagonal = [c for c in cells if c["t_final"] == c["n_qubits"]]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "n_qubits", "t_final"])
    if boundary is not None:
        for n, t in zip(boundary.n_qubits, boundary.t_f_star):
            writer.writerow(["boundary", _fmt(float(n)), _fmt(float(t))])
    for n, t in sorted({(r.n_qubits, r.t_final) for r in rows}):
        writer.writerow(["simulated", n, _fmt(float(t))])
    boundary_csv = buf.getvalue()

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", "n_q_threshold"])
    for p, n in thresholds:
        writer.writerow([_fmt(float(p)), _fmt(n)])
    threshold_csv = buf.getvalue()

    contents = [cells_to_csv(diagonal), cells_to_csv(cells), boundary_csv, threshold_csv]
    paths = []
    for name, text in zip(PLOT_FILES, contents):
        path = out_dir / name
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"failed writing {path}: {exc}") from exc
        paths.append(path)
    return paths

