"""Command-line front end.

Subcommands: simulate, sweep, spectrum, analytic, compare, verify.
Exit codes: 0 success, 1 usage, 2 numerical failure, 3 verification or
tolerance failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analytic, scramblon
from .errors import IntegrationError, NumericalError, ResourceError, SpecError
from .generator import assemble
from .io import write_csv, write_json
from .model import ModelKind, ModelSpec, SizeDefinition
from .propagate import EXPM_CAP, default_grid, evolve_expm, evolve_ode, moments
from .spectral import fit_log_gap, gap_sweep
from .verify import Fault, run_verification

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3

MOMENT_COLUMNS = ["t", "mean", "norm", "variance", "mean_normalized"]
DEFAULT_TOL = 0.05


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    """``"20,24,28"`` or inclusive range ``"20:60:4"``."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be positive")
        return list(range(lo, hi + 1, step))
    return [int(p) for p in text.split(",") if p.strip()]


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _add_spec_args(p):
    p.add_argument("--model", choices=["A", "B"], default="A")
    p.add_argument("--definition", choices=["1", "2"], default="1")
    p.add_argument("--v1", type=float, default=0.5, help="hopping rate")
    p.add_argument("--v3", type=float, default=None, help="model A interaction rate (default 1)")
    p.add_argument("--v4", type=float, default=None, help="model B interaction rate (default 1)")
    p.add_argument("--n", type=int, default=100, help="number of system fermions N")


def _add_grid_args(p):
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--points", type=int, default=200)


def _add_output_args(p, formats=("csv", "json")):
    p.add_argument("--output", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=list(formats), default=formats[0])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opsize", description="Operator size distributions in Brownian SYK-type open systems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="propagate the size distribution for one coupling point")
    _add_spec_args(p)
    _add_grid_args(p)
    _add_output_args(p)
    p.add_argument("--distribution", default=None, help="also write t,n,p to this path")
    p.add_argument("--method", choices=["auto", "expm", "ode"], default="auto")

    p = sub.add_parser("sweep", help="mean and norm over a list of ratios v1 / v_int")
    _add_spec_args(p)
    _add_grid_args(p)
    _add_output_args(p)
    p.add_argument("--ratio-list", type=_float_list, required=True)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("spectrum", help="slowest decay rate of the size >= 1 block over a list of N")
    _add_spec_args(p)
    _add_output_args(p)
    p.add_argument("--n-list", type=_int_list, default=_int_list("20:60:4"))
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("analytic", help="large-N closed forms on a time grid")
    _add_spec_args(p)
    _add_grid_args(p)
    _add_output_args(p)
    p.add_argument("--mu", type=float, default=None, help="also report the generating function at this mu")
    p.add_argument("--distribution", default=None, help="also write t,n,p for n = 0..N to this path")

    p = sub.add_parser("compare", help="finite-N propagation against closed forms or the scramblon continuum")
    _add_spec_args(p)
    _add_grid_args(p)
    _add_output_args(p, formats=("json",))
    p.add_argument("--mode", choices=["closed-form", "scramblon"], default="closed-form")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--lambda-scr", type=float, default=1.0, help="scramblon parameter for the distribution check")
    p.add_argument("--plateau-lambda", type=float, default=1e4, help="scramblon parameter for the plateau check")

    p = sub.add_parser("verify", help="spin-oracle, conservation and parity suites")
    _add_output_args(p, formats=("json",))
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
    return parser


def _spec(args, v1=None) -> ModelSpec:
    kind = ModelKind(args.model)
    v_int = _v_int(args)
    other = args.v4 if kind is ModelKind.A else args.v3
    if other not in (None, 0.0):
        raise SpecError(f"model {kind.value} does not take --{'v4' if kind is ModelKind.A else 'v3'}")
    return ModelSpec.create(kind, args.definition, args.v1 if v1 is None else v1, v_int, args.n)


def _v_int(args) -> float:
    value = args.v3 if args.model == "A" else args.v4
    return 1.0 if value is None else value


def _grid(args, spec):
    if args.points < 1:
        raise SpecError("--points must be >= 1")
    if args.t_max is not None and args.t_max < 0:
        raise SpecError("--t-max must be >= 0")
    return default_grid(spec, args.t_max, args.points)


def _evolve(spec, grid, method="auto"):
    g = assemble(spec)
    if method == "expm" or (method == "auto" and spec.n_fermions <= EXPM_CAP):
        return evolve_expm(g, grid)
    return evolve_ode(g, grid)


def _emit_table(args, header, rows, meta=None):
    if args.format == "csv":
        write_csv(args.output, header, rows)
    else:
        write_json(args.output, {**(meta or {}), "columns": header, "rows": [list(r) for r in rows]})


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "format", "inject_fault")}


def cmd_simulate(args) -> int:
    spec = _spec(args)
    traj = _evolve(spec, _grid(args, spec), args.method)
    m = moments(traj)
    rows = zip(traj.times, m["mean"], m["norm"], m["variance"], m["mean_normalized"])
    _emit_table(args, MOMENT_COLUMNS, rows, {"command": "simulate", "config": _config(args)})
    if args.distribution:
        write_csv(
            args.distribution,
            ["t", "n", "p"],
            ((t, n, w[n]) for t, w in zip(traj.times, traj.weights) for n in range(w.size)),
        )
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.ratio_list:
        raise UsageError("--ratio-list must name at least one ratio")
    v_int = _v_int(args)
    specs = [_spec(args, v1=ratio * v_int) for ratio in args.ratio_list]
    t_max = args.t_max if args.t_max is not None else (5.0 / v_int if v_int > 0 else 1.0)
    grid = default_grid(specs[0], t_max, args.points)

    def one(spec):
        return moments(_evolve(spec, grid))

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(one, specs))
    else:
        results = [one(s) for s in specs]
    order = sorted(range(len(specs)), key=lambda i: args.ratio_list[i])
    rows = [
        (args.ratio_list[i], t, results[i]["mean"][k], results[i]["norm"][k])
        for i in order
        for k, t in enumerate(grid)
    ]
    _emit_table(args, ["ratio", "t", "mean", "norm"], rows, {"command": "sweep", "config": _config(args)})
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if not args.n_list:
        raise UsageError("--n-list must name at least one N")
    _spec(args)  # validate couplings once
    rows = gap_sweep(args.model, args.definition, args.v1, _v_int(args), args.n_list, workers=args.jobs)
    _emit_table(
        args,
        ["N", "lambda_gap", "reliable"],
        [(r.n_fermions, r.lambda_gap, r.reliable) for r in rows],
        {"command": "spectrum", "config": _config(args), "fit": fit_log_gap(rows)},
    )
    return EXIT_OK


def _analytic_distribution(spec, t, sizes):
    kind, definition = spec.kind, spec.definition
    if kind is ModelKind.A and definition is SizeDefinition.I:
        return analytic.p_modelA_defI(sizes, t, spec.v1, spec.v3)
    if kind is ModelKind.A:
        return analytic.p_modelA_defII(sizes, t, spec.v1, spec.v3)
    if definition is SizeDefinition.II:
        return analytic.p_modelB_defII(sizes, t, spec.v1, spec.v4)
    return None


def _analytic_z(spec, grid, mu):
    kind, definition = spec.kind, spec.definition
    if kind is ModelKind.A and definition is SizeDefinition.I:
        return analytic.z_modelA_defI(mu, grid, spec.v1, spec.v3)
    if kind is ModelKind.A:
        return analytic.z_modelA_defII(mu, grid, spec.v1, spec.v3)
    if definition is SizeDefinition.II:
        return analytic.z_modelB_defII(mu, grid, spec.v1, spec.v4)
    return analytic.heisenberg_z("B_defI", mu, grid, spec.v1, spec.v4)


def cmd_analytic(args) -> int:
    spec = _spec(args)
    grid = _grid(args, spec)
    mean = analytic.closed_form_mean(spec.kind, spec.definition, grid, spec.v1, spec.v_int)
    norm = analytic.closed_form_norm(spec.kind, spec.definition, grid, spec.v1, spec.v_int)
    header, cols = ["t", "mean", "norm"], [grid, mean, norm]
    if args.mu is not None:
        if args.mu < 0:
            raise SpecError("--mu must be >= 0")
        header.append("z")
        cols.append(_analytic_z(spec, grid, args.mu))
    if args.distribution and _analytic_distribution(spec, 0.0, np.arange(1)) is None:
        raise UsageError("no closed-form distribution for model B under definition I")
    _emit_table(args, header, zip(*cols), {"command": "analytic", "config": _config(args)})
    if args.distribution:
        sizes = np.arange(spec.n_fermions + 1)
        write_csv(
            args.distribution,
            ["t", "n", "p"],
            ((t, n, p) for t in grid for n, p in zip(sizes, _analytic_distribution(spec, t, sizes))),
        )
    return EXIT_OK


def _compare_closed_form(args, spec) -> dict:
    t_max = args.t_max if args.t_max is not None else (1.0 / spec.max_rate if spec.max_rate > 0 else 1.0)
    grid = default_grid(spec, t_max, args.points)
    traj = _evolve(spec, grid)
    m = moments(traj)
    sizes = np.arange(spec.n_fermions + 1)
    mean_ref = analytic.closed_form_mean(spec.kind, spec.definition, grid, spec.v1, spec.v_int)
    points = []
    for k, t in enumerate(grid):
        row = {
            "t": t,
            "mean": m["mean"][k],
            "mean_closed_form": mean_ref[k],
            "mean_abs_error": abs(m["mean"][k] - mean_ref[k]),
            "mean_rel_error": abs(m["mean"][k] - mean_ref[k]) / abs(mean_ref[k]),
        }
        ref = _analytic_distribution(spec, t, sizes)
        if ref is not None:
            diff = np.abs(traj.weights[k] - ref)
            row["dist_sup_abs"] = float(diff.max())
            row["dist_sup_rel"] = float(diff.max() / max(np.abs(ref).max(), np.finfo(float).tiny))
        points.append(row)
    worst_mean = max(p["mean_rel_error"] for p in points)
    worst_dist = max((p["dist_sup_abs"] for p in points if "dist_sup_abs" in p), default=None)
    # the distribution decides where a closed form exists; the mean carries larger 1/N corrections
    metric = "max_mean_rel_error" if worst_dist is None else "max_dist_sup_abs"
    summary = {"max_mean_rel_error": worst_mean, "max_dist_sup_abs": worst_dist, "metric": metric, "tol": args.tol}
    passed = summary[metric] <= args.tol
    return {"mode": "closed-form", "passed": passed, "summary": summary, "points": points}


def _compare_scramblon(args, spec) -> dict:
    if spec.kind is not ModelKind.A or spec.definition is not SizeDefinition.I:
        raise SpecError("scramblon comparison needs --model A --definition 1")
    N = spec.n_fermions
    t_dist = scramblon.time_for_lambda(spec.v1, spec.v3, N, args.lambda_scr)
    t_plateau = scramblon.time_for_lambda(spec.v1, spec.v3, N, args.plateau_lambda)
    if not 0 < t_dist < t_plateau:
        raise SpecError("need 0 < t(lambda_scr) < t(plateau_lambda); raise the lambdas")
    traj = _evolve(spec, [t_dist, t_plateau])
    report = scramblon.compare_finite_n(traj)
    dist, plateau = report["points"]
    target = plateau["late_time_mean_fraction"]
    plateau_dev = (plateau["mean_fraction"] - target) / target
    passed = dist["l1_distance"] <= args.tol and abs(plateau_dev) <= args.tol
    summary = {
        "l1_distance": dist["l1_distance"],
        "plateau_mean_fraction": plateau["mean_fraction"],
        "plateau_target": target,
        "plateau_rel_deviation": plateau_dev,
        "tol": args.tol,
    }
    return {"mode": "scramblon", "passed": passed, "summary": summary, "margin": report["margin"], "points": report["points"]}


def cmd_compare(args) -> int:
    spec = _spec(args)
    if args.tol <= 0:
        raise SpecError("--tol must be positive")
    body = _compare_scramblon(args, spec) if args.mode == "scramblon" else _compare_closed_form(args, spec)
    write_json(args.output, {"command": "compare", "config": _config(args), **body})
    return EXIT_OK if body["passed"] else EXIT_VERIFY


def cmd_verify(args) -> int:
    if args.n_max < 1:
        raise SpecError("--n-max must be >= 1")
    fault = Fault.parse(args.inject_fault) if args.inject_fault else None
    report = run_verification(args.n_max, fault)
    write_json(args.output, {"command": "verify", **report})
    return EXIT_OK if report["passed"] else EXIT_VERIFY


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
    "analytic": cmd_analytic,
    "compare": cmd_compare,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, SpecError) as exc:
        print(f"opsize: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, IntegrationError, ResourceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"opsize: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"opsize: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
