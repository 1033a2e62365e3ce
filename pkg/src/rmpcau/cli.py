"""Command-line front end.

    rmpcau config         --out cacc.json
    rmpcau invariant-set  --config cacc.json --kind positive --out O.json
    rmpcau simulate       --config cacc.json --terminal O.json --mode adversarial-vertex --steps 150
    rmpcau sweep          --config cacc.json --terminal O.json --lambdas 0,0.1,1,10,100

Exit codes: 0 ok, 2 bad input, 3 invariant set not converged, 4 LP failure,
5 optimal control problem infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cacc import cacc_config
from .config import ConfigError, ProblemConfig
from .errors import InfeasibleAtStep, InfeasibleModel, NotConverged, NumericalFailure
from .geometry import HPolytope, ordered_polygon, remove_redundancy
from .invariant import InvariantSetResult, compute_C_adj, compute_O_adj, scaling_slice
from .mpc import DISTURBANCE_MODES, is_nondecreasing, lambda_sweep, run_closed_loop
from .system import build_autonomous_augmentation, build_controlled_augmentation

log = logging.getLogger("rmpcau")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOT_CONVERGED = 3
EXIT_LP = 4
EXIT_INFEASIBLE = 5


class _UsageError(Exception):
    pass


def _load_config(path):
    if path is None:
        return cacc_config()
    return ProblemConfig.load(path)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise _UsageError(f"cannot parse number list {text!r}") from exc


def compute_invariant(cfg: ProblemConfig, kind: str, max_iter=None) -> InvariantSetResult:
    sys_, unc = cfg.system(), cfg.uncertainty()
    max_iter = cfg.max_iter if max_iter is None else max_iter
    if kind == "positive":
        K, b = cfg.feedback()
        return compute_O_adj(build_autonomous_augmentation(sys_, unc, K, b), max_iter)
    if kind == "control":
        return compute_C_adj(build_controlled_augmentation(sys_, unc), max_iter)
    raise _UsageError(f"unknown invariant set kind {kind!r}")


def _check_bounded(cfg):
    Z = cfg.uncertainty().admissible_set
    if not Z.is_bounded() or not cfg.system().state_set.is_bounded():
        raise _UsageError("state and admissible uncertainty sets must be bounded; add box limits")


def _resolve_terminal(choice, cfg):
    if choice is None or choice.lower() == "none":
        return None
    if choice in ("positive", "control"):
        return compute_invariant(cfg, choice).set
    try:
        data = json.loads(Path(choice).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read terminal set {choice}: {exc}") from exc
    result = InvariantSetResult.from_dict(data)
    if not result.converged:
        log.warning("terminal set %s comes from a non-converged iteration", choice)
    return result.set


def slice_polygons(result_set: HPolytope, cfg: ProblemConfig, values):
    unc = cfg.uncertainty()
    out = {}
    for y in values:
        sl = remove_redundancy(scaling_slice(result_set, unc, y))
        out[y] = np.zeros((0, 2)) if sl.is_empty() else ordered_polygon(sl)
    return out


# -- commands ----------------------------------------------------------------


def cmd_config(args):
    cfg = cacc_config(horizon=args.horizon) if args.horizon else cacc_config()
    if args.out:
        cfg.save(args.out)
    else:
        sys.stdout.write(cfg.dumps() + "\n")
    return EXIT_OK


def cmd_invariant_set(args):
    cfg = _load_config(args.config)
    _check_bounded(cfg)
    status = EXIT_OK
    try:
        result = compute_invariant(cfg, args.kind, args.max_iter)
    except NotConverged as exc:
        print(f"warning: {exc}; writing the last iterate", file=sys.stderr)
        result = exc.result
        status = EXIT_NOT_CONVERGED
    out = Path(args.out)
    out.write_text(json.dumps(result.to_dict(), indent=2) + "\n")
    values = _float_list(args.slices) if args.slices else cfg.slices
    if cfg.system().n_x == 2:
        polys = slice_polygons(result.set, cfg, values)
        csv_path = out.with_name(out.stem + "_slices.csv")
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y", "vertex", "x1", "x2"])
            for y, poly in polys.items():
                for i, v in enumerate(poly):
                    w.writerow([y, i, f"{v[0]:.10g}", f"{v[1]:.10g}"])
        if not args.no_plot:
            from .plotting import plot_slices
            title = "adjustable positive invariant set" if args.kind == "positive" else "adjustable control invariant set"
            plot_slices(polys, out.with_suffix(".png"), title=title)
    print(f"{args.kind} invariant set: converged={result.converged} iterations={result.iterations} "
          f"rows={result.set.n_rows} -> {out}")
    return status


TRACE_HEADER_DOC = "t, x..., u..., Y..., y_off..., tau, objective, feasible, w..."


def write_trace_csv(trace, fh):
    X = trace.states
    nx = X.shape[1]
    nu = len(trace.u[0]) if trace.u else 0
    nY = trace.Y[0].size if trace.Y else 0
    ny = len(trace.y_off[0]) if trace.y_off else 0
    nw = len(trace.w[0]) if trace.w else 0
    w = csv.writer(fh)
    w.writerow(["t"] + [f"x{i + 1}" for i in range(nx)] + [f"u{i + 1}" for i in range(nu)]
               + [f"Y{i + 1}" for i in range(nY)] + [f"y_off{i + 1}" for i in range(ny)]
               + ["tau", "objective", "feasible"] + [f"w{i + 1}" for i in range(nw)])
    fmt = lambda a: [f"{v + 0.0:.10g}" for v in np.ravel(a, order="F")]  # noqa: E731
    for t in range(trace.steps):
        w.writerow([t] + fmt(X[t]) + fmt(trace.u[t]) + fmt(trace.Y[t]) + fmt(trace.y_off[t])
                   + [f"{trace.tau[t]:.10g}", f"{trace.objective[t]:.10g}", 1] + fmt(trace.w[t]))
    w.writerow([trace.steps] + fmt(X[trace.steps]) + [""] * (nu + nY + ny + 3 + nw))


def cmd_simulate(args):
    cfg = _load_config(args.config)
    terminal = _resolve_terminal(args.terminal, cfg)
    problem = cfg.problem(terminal)
    script = None
    if args.mode == "scripted":
        if not args.script:
            raise _UsageError("--mode scripted needs --script FILE (one primitive point per line)")
        script = np.atleast_2d(np.loadtxt(args.script, delimiter=",", ndmin=2))
    x0 = np.array(_float_list(args.x0)) if args.x0 else cfg.x0
    status = EXIT_OK
    try:
        trace = run_closed_loop(problem, x0, args.steps, mode=args.mode, seed=args.seed, script=script)
    except InfeasibleAtStep as exc:
        print(f"infeasible at step {exc.step}: {exc}", file=sys.stderr)
        trace = exc.trace
        status = EXIT_INFEASIBLE
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    if args.out:
        out = Path(args.out)
        out.write_text(buf.getvalue())
        if not args.no_plot and trace.steps:
            from .plotting import plot_trace
            plot_trace(trace, out.with_suffix(".png"), dt=cfg.data.get("dt", 1.0))
        summary_stream = sys.stdout
    else:
        sys.stdout.write(buf.getvalue())
        summary_stream = sys.stderr
    ys = ",".join(f"{Y.flat[0]:.4g}" for Y in trace.Y)
    print(f"feasible {trace.feasible_count()}/{args.steps} mean_d {np.mean(trace.states[:, 0]):.6g} "
          f"y* {ys}", file=summary_stream)
    return status


def cmd_sweep(args):
    cfg = _load_config(args.config)
    terminal = _resolve_terminal(args.terminal, cfg)
    problem = cfg.problem(terminal)
    lambdas = _float_list(args.lambdas)
    if any(v < 0 for v in lambdas):
        raise _UsageError("lambda values must be nonnegative")
    x0 = np.array(_float_list(args.x0)) if args.x0 else cfg.x0
    try:
        rows = lambda_sweep(problem, x0, lambdas, steps=args.steps, seed=args.seed)
    except (InfeasibleAtStep, InfeasibleModel) as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["lambda", "y_star", "avg_distance"])
    for r in rows:
        w.writerow([f"{r.lam:g}", f"{r.y_star + 0.0:.10g}", f"{r.avg_distance:.10g}"])
    ok_y = is_nondecreasing([r.y_star for r in rows])
    ok_d = is_nondecreasing([r.avg_distance for r in rows])
    if args.out:
        out = Path(args.out)
        out.write_text(buf.getvalue())
        if not args.no_plot:
            from .plotting import plot_sweep
            plot_sweep(rows, out.with_suffix(".png"))
        report = sys.stdout
    else:
        sys.stdout.write(buf.getvalue())
        report = sys.stderr
    print(f"{'PASS' if ok_y else 'FAIL'} y_star nondecreasing in lambda", file=report)
    print(f"{'PASS' if ok_d else 'FAIL'} avg_distance nondecreasing in lambda", file=report)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="rmpcau", description=__doc__.split("\n")[0] or None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("config", help="write the bundled cruise-control problem document")
    p.add_argument("--out")
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=cmd_config)

    p = sub.add_parser("invariant-set", help="compute an adjustable invariant set")
    p.add_argument("--config")
    p.add_argument("--kind", choices=("positive", "control"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--slices", help="comma-separated scaling values for the x-slices")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_invariant_set)

    p = sub.add_parser("simulate", help="closed-loop receding-horizon simulation")
    p.add_argument("--config")
    p.add_argument("--steps", type=int, default=150)
    p.add_argument("--mode", choices=DISTURBANCE_MODES, default="zero")
    p.add_argument("--terminal", help="invariant-set JSON, 'positive', 'control' or 'none'")
    p.add_argument("--script", help="CSV of primitive-set points for --mode scripted")
    p.add_argument("--x0", help="comma-separated initial state (default: from config)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="scalarisation-weight sweep")
    p.add_argument("--config")
    p.add_argument("--lambdas", default="0,0.1,1,10,100")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--terminal", help="invariant-set JSON, 'positive', 'control' or 'none'")
    p.add_argument("--x0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, _UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except NumericalFailure as exc:
        print(f"error: LP failure: {exc}", file=sys.stderr)
        return EXIT_LP
    except (InfeasibleModel, InfeasibleAtStep) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
