"""Command-line entry point: ``vqsbench {gen,run,fit,boundary,threshold,plot-data,trajectory}``.

Exit codes: 0 success, 2 usage or configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness, scaling
from .ansatz import HvaAnsatz
from .hamiltonian import ProblemInstance, random_instance
from .vqs import StiffnessError, VqsConfig, integrate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3

log = logging.getLogger("vqsbench")


class ConfigError(Exception):
    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


class DataError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part.strip()[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        if "-" in part.strip()[1:]:
            lo, hi = part.split("-", 1)
            out.extend(float(v) for v in range(int(lo), int(hi) + 1))
        else:
            out.append(float(part))
    return out


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

_NUMBER = (int, float)

_SWEEP_FIELDS = {
    "n_qubits_range": ("int_list",),
    "t_final_values": ("number_list",),
    "n_instances": ("int",),
    "fidelity_threshold": ("number",),
    "max_layers": ("int",),
    "max_trotter_steps": ("int",),
    "base_seed": ("int",),
    "methods": ("str_list",),
}

_VQS_FIELDS = {
    "ode_rel_tol": ("number",),
    "ode_abs_tol": ("number",),
    "max_step": ("number", "null"),
    "lstsq_rcond": ("number", "null"),
    "max_steps": ("int", "null"),
}


def _matches(value, kind: str) -> bool:
    is_int = isinstance(value, int) and not isinstance(value, bool)
    is_num = isinstance(value, _NUMBER) and not isinstance(value, bool)
    if kind == "int":
        return is_int
    if kind == "number":
        return is_num
    if kind == "null":
        return value is None
    if not isinstance(value, list):
        return False
    if kind == "int_list":
        return all(_matches(v, "int") for v in value)
    if kind == "number_list":
        return all(_matches(v, "number") for v in value)
    if kind == "str_list":
        return all(isinstance(v, str) for v in value)
    raise AssertionError(kind)


def _validate(data, spec: dict, prefix: str = "") -> None:
    if not isinstance(data, dict):
        raise ConfigError(prefix.rstrip(".") or "<root>", "expected a JSON object")
    for key, value in data.items():
        path = prefix + key
        if key == "vqs_config" and not prefix:
            _validate(value, _VQS_FIELDS, "vqs_config.")
            continue
        if key not in spec:
            raise ConfigError(path, "unknown field")
        if not any(_matches(value, kind) for kind in spec[key]):
            raise ConfigError(path, f"expected {' or '.join(spec[key])}, got {value!r}")


def load_sweep_config(path: str | Path) -> harness.SweepConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    _validate(data, _SWEEP_FIELDS)
    try:
        return harness.SweepConfig.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise ConfigError("<root>", str(exc)) from exc


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.nq < 2:
        raise ConfigError("--nq", f"need at least 2 qubits, got {args.nq}")
    instance = random_instance(args.nq, args.seed)
    try:
        instance.save(args.out)
    except OSError as exc:
        raise ConfigError("--out", f"cannot write {args.out}: {exc}") from exc
    return EXIT_OK


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def cmd_run(args) -> int:
    config = load_sweep_config(args.config) if args.config else harness.SweepConfig()
    overrides = {}
    if args.nq is not None:
        overrides["n_qubits_range"] = args.nq
    if args.tf is not None:
        overrides["t_final_values"] = args.tf
    if args.methods is not None:
        overrides["methods"] = args.methods
    if args.threshold is not None:
        overrides["fidelity_threshold"] = args.threshold
    if args.max_layers is not None:
        overrides["max_layers"] = args.max_layers
    if args.max_steps is not None:
        overrides["max_trotter_steps"] = args.max_steps
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.instances is not None:
        overrides["n_instances"] = args.instances
    if overrides:
        merged = config.to_dict() | overrides
        try:
            config = harness.SweepConfig.from_dict(merged)
        except ValueError as exc:
            raise ConfigError("<flags>", str(exc)) from exc

    def progress(r: harness.RunResult) -> None:
        log.info("%s n_q=%d t_f=%g seed=%d: %s depth=%d fidelity=%.4f",
                 r.method, r.n_qubits, r.t_final, r.instance_seed, r.status, r.min_depth, r.final_fidelity)

    results = harness.run_sweep(config, jobs=args.jobs, progress=progress)
    out = Path(args.out)
    harness.write_results(out, results, timing=args.timing)
    harness.write_provenance(_sidecar(out, ".provenance.json"), config)
    _sidecar(out, ".cells.csv").write_text(harness.cells_to_csv(harness.aggregate_cells(results)))
    unsolved = sum(not r.solved for r in results)
    print(f"{len(results)} rows, {len(results) - unsolved} solved, {unsolved} unsolved -> {out}",
          file=sys.stderr)
    return EXIT_OK


def _read_rows(path) -> list[harness.RunResult]:
    try:
        return harness.read_results(path)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read results {path}: {exc}") from exc


def cmd_fit(args) -> int:
    rows = _read_rows(args.results)
    methods = harness.METHODS if args.method == "both" else (args.method,)
    fits = []
    for method in methods:
        try:
            fits.append(scaling.fit_power_law(rows, method))
        except scaling.InsufficientDataError as exc:
            raise DataError(f"insufficient data for {method}: {exc.n_rows} usable rows ({exc})") from exc
    scaling.write_fits(args.out, fits)
    for f in fits:
        print(f"{f.method}: a={f.a:.4g}±{f.se_a:.2g} b={f.b:.4g}±{f.se_b:.2g} "
              f"c={f.c:.4g}±{f.se_c:.2g} ({f.n_rows} rows)", file=sys.stderr)
    return EXIT_OK


def _load_fit_pair(args) -> tuple[scaling.FitParams, scaling.FitParams]:
    if args.fits is None:
        return scaling.PUBLISHED_FITS[harness.VQS], scaling.PUBLISHED_FITS[harness.TROTTER]
    try:
        fits = scaling.read_fits(args.fits)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise DataError(f"cannot read fits {args.fits}: {exc}") from exc
    missing = [m for m in harness.METHODS if m not in fits]
    if missing:
        raise DataError(f"{args.fits} lacks fits for {missing}")
    return fits[harness.VQS], fits[harness.TROTTER]


def cmd_boundary(args) -> int:
    fit_vqs, fit_trotter = _load_fit_pair(args)
    try:
        boundary = scaling.advantage_boundary(fit_vqs, fit_trotter, args.nq)
    except scaling.DegenerateBoundaryError as exc:
        raise DataError(str(exc)) from exc
    scaling.write_boundary(args.out, boundary)
    if boundary.kappa is not None:
        print(f"t_f* = {boundary.kappa:.4g} * n_q^{boundary.gamma:.4g}; VQS advantage {boundary.vqs_side}",
              file=sys.stderr)
    else:
        print(f"no boundary; VQS advantage {boundary.vqs_side}", file=sys.stderr)
    return EXIT_OK


def _p_grid(args) -> np.ndarray:
    if args.p is not None:
        return np.array(args.p, dtype=float)
    return np.logspace(np.log10(args.p_min), np.log10(args.p_max), args.n_p)


def cmd_threshold(args) -> int:
    fit_vqs, fit_trotter = _load_fit_pair(args)
    curve = scaling.threshold_curve(fit_vqs, fit_trotter, _p_grid(args),
                                    range(args.nq_min, args.nq_max + 1))
    scaling.write_thresholds(args.out, curve)
    return EXIT_OK


def cmd_plot_data(args) -> int:
    rows = _read_rows(args.results)
    boundary, curve = None, []
    try:
        if args.fits is not None:
            fit_vqs, fit_trotter = _load_fit_pair(args)
        else:
            fit_vqs = scaling.fit_power_law(rows, harness.VQS)
            fit_trotter = scaling.fit_power_law(rows, harness.TROTTER)
    except scaling.InsufficientDataError as exc:
        print(f"skipping boundary and threshold: {exc}", file=sys.stderr)
    else:
        try:
            boundary = scaling.advantage_boundary(fit_vqs, fit_trotter, range(2, args.nq_max + 1))
        except scaling.DegenerateBoundaryError as exc:
            print(f"skipping boundary: {exc}", file=sys.stderr)
        p_grid = np.logspace(np.log10(args.p_min), np.log10(args.p_max), args.n_p)
        curve = scaling.threshold_curve(fit_vqs, fit_trotter, p_grid, range(2, args.nq_max + 1))
    scaling.emit_plot_data(args.out_dir, rows, boundary, curve)
    return EXIT_OK


def cmd_trajectory(args) -> int:
    try:
        instance = ProblemInstance.load(args.instance)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError("--instance", str(exc)) from exc
    ansatz = HvaAnsatz(instance, args.layers)
    try:
        traj = integrate(ansatz, VqsConfig(), args.tf)
    except StiffnessError as exc:
        traj = exc.trajectory
        print(f"integration stopped early: {exc}", file=sys.stderr)
    Path(args.out).write_text(json.dumps(traj.to_dict()) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _methods(text: str) -> list[str]:
    methods = [m.strip().lower() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in harness.METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {list(harness.METHODS)}")
    return methods


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqsbench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random problem instance as JSON")
    p.add_argument("--nq", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run the minimum-depth sweep")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, help="base seed (overrides config)")
    p.add_argument("--nq", type=_int_list, help="e.g. 2-5 or 2,4,6")
    p.add_argument("--tf", type=_float_list, help="e.g. 1-4 or 0.5,1,2")
    p.add_argument("--instances", type=int)
    p.add_argument("--methods", type=_methods, help="comma list of vqs,trotter")
    p.add_argument("--threshold", type=float)
    p.add_argument("--max-layers", type=int)
    p.add_argument("--max-steps", type=int, help="Trotter step cap")
    p.add_argument("--timing", action="store_true", help="fill wall_time_s (breaks byte-identical reruns)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fit", help="fit D = a n_q^b t_f^c to a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--method", choices=[*harness.METHODS, "both"], default="both")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    for name, func, helptext in [("boundary", cmd_boundary, "equal-depth boundary t_f*(n_q)"),
                                 ("threshold", cmd_threshold, "classical-cost threshold vs p")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--fits", help="fit JSON from `fit`; published values if omitted")
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)
        if name == "boundary":
            p.add_argument("--nq", type=_int_list, default=list(range(2, 41)))
        else:
            p.add_argument("--p", type=float, nargs="+", help="explicit p values")
            p.add_argument("--p-min", type=float, default=1e-2)
            p.add_argument("--p-max", type=float, default=1e2)
            p.add_argument("--n-p", type=int, default=50)
            p.add_argument("--nq-min", type=int, default=2)
            p.add_argument("--nq-max", type=int, default=40)

    p = sub.add_parser("plot-data", help="write plot-ready CSVs for all figures")
    p.add_argument("--results", required=True)
    p.add_argument("--fits")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--nq-max", type=int, default=40)
    p.add_argument("--p-min", type=float, default=1e-2)
    p.add_argument("--p-max", type=float, default=1e2)
    p.add_argument("--n-p", type=int, default=50)
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("trajectory", help="dump one VQS trajectory as JSON (debugging)")
    p.add_argument("--instance", required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--tf", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trajectory)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"vqsbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"vqsbench: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
