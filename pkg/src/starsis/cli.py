"""Command-line interface: ``starsis <subcommand> [options]``.

Exit codes: 0 success, 1 validation failure, 2 usage or parameter error,
3 solver failure. JSON output carries ``"schema": "starlike-sis/1"`` and
every float is written with 17 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Callable

import numpy as np

from . import dynamics, multilevel, reduced_map, scalar, spectral
from .errors import (
    ClosedFormSingularError,
    ConvergenceError,
    CurveExitError,
    DimensionError,
    InsufficientSamplesError,
    ParameterError,
    RegimeError,
    RegionError,
    StateRangeError,
)
from .model_core import (
    Params,
    build_multilevel_star,
    build_star,
    level_spreads,
    spoke_spread,
    step_full,
)

SCHEMA = "starlike-sis/1"
EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3
LEVEL_MATCH = 1e-8
SWEEP_COLUMNS = ("a", "b", "n", "regime", "x_f", "y_f", "lambda1")
DEFAULTS = {"tol": 1e-10, "max_iters": 10**6, "format": "json", "seed": 20110601,
            "steps": None, "samples": 1000, "validate_steps": 1000}

# Reduced-map steps used by ``validate``; tests replace these to check that a
# corrupted reduction is caught.
reduced_star_step: Callable = reduced_map.apply_F
reduced_level_step: Callable = multilevel.apply_F_multilevel


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    def __init__(self, report):
        super().__init__("validation failed")
        self.report = report


# -- formatting ----------------------------------------------------------------

def fmt_float(v: float) -> str:
    return "%.17g" % v


def _encode(obj: Any) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj)) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def to_json(report: dict) -> str:
    return _encode({"schema": SCHEMA, **report}) + "\n"


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v)) if math.isfinite(v) else ""
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _flatten(report: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in report.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    flat = _flatten(report)
    return to_csv(list(flat), [list(flat.values())])


# -- argument handling ---------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _range(text: str) -> tuple[float, float, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("range must be LO,HI,COUNT")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--a", type=float, help="survival probability a = 1 - delta")
    p.add_argument("--b", type=float, help="infection probability b = beta")
    p.add_argument("--n", type=int, help="number of spokes")
    p.add_argument("--counts", type=_ints, help="multilevel counts n1,n2,...")
    p.add_argument("--tol", type=float, help="convergence tolerance (default 1e-10)")
    p.add_argument("--max-iters", dest="max_iters", type=int, help="iteration cap (default 1e6)")
    p.add_argument("--format", choices=("json", "csv"), help="output format (default json)")
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--config", help="JSON file of option values; flags given explicitly win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="starsis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="epidemic threshold and regime")
    _common(p)

    p = sub.add_parser("fixed-point", help="trivial and nontrivial fixed points")
    _common(p)
    p.add_argument("--scalar", action="store_true", help="one-variable n = 1 diagonal map")

    p = sub.add_parser("iterate", help="iterate the reduced map from a start point",
                       description="With --trace the trajectory is written as CSV rows "
                                   "t,x,y (or t,s1,...,sL / t,x for --scalar).")
    _common(p)
    p.add_argument("--start", type=_floats, help="start state, comma-separated (default 0.5 each)")
    p.add_argument("--scalar", action="store_true", help="one-variable n = 1 diagonal map")
    p.add_argument("--trace", action="store_true", help="emit the full trajectory")

    p = sub.add_parser("sweep", help="fixed point and leading eigenvalue over parameters",
                       description="CSV columns, in order: " + ",".join(SWEEP_COLUMNS) + ". "
                                   "x_f, y_f and lambda1 are empty when no nontrivial fixed "
                                   "point exists. Use --line-m/--steps for the n = 2 line "
                                   "b = (m - a)/sqrt(2), or --a-range/--b-range/--n for a grid.")
    _common(p)
    p.add_argument("--line-m", dest="line_m", type=float, help="m of the line b = (m - a)/sqrt(2)")
    p.add_argument("--steps", type=int, help="points on the line")
    p.add_argument("--a-range", dest="a_range", type=_range, help="LO,HI,COUNT (inclusive)")
    p.add_argument("--b-range", dest="b_range", type=_range, help="LO,HI,COUNT (inclusive)")

    p = sub.add_parser("validate", help="full-graph vs reduced-map cross-check")
    _common(p)
    p.add_argument("--steps", dest="validate_steps", type=int, help="steps to compare (default 1000)")
    p.add_argument("--seed", type=int, help="seed for the random start")

    p = sub.add_parser("classify", help="region of a point, or the II/IV flip label")
    _common(p)
    p.add_argument("--point", type=_floats, help="x,y")
    p.add_argument("--flip", action="store_true", help="run the flip classifier")
    p.add_argument("--samples", type=int, help="samples per region (default 1000)")
    p.add_argument("--seed", type=int, help="sampler seed")
    return parser


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge ``--config`` values under explicit flags, then fill defaults."""
    merged = dict(vars(args))
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if key not in merged:
                raise UsageError(f"unknown config key {key!r}")
            if merged[key] is None or merged[key] is False:
                merged[key] = value
    for key, value in DEFAULTS.items():
        if key in merged and merged[key] is None:
            merged[key] = value
    return argparse.Namespace(**merged)


def _need(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _params(args) -> Params:
    _need(args, "a", "b")
    return Params(args.a, args.b)


def _star(args) -> reduced_map.StarParams:
    _need(args, "n")
    return reduced_map.StarParams(_params(args), args.n)


def _pair(s) -> list[float] | None:
    return None if s is None else [float(s[0]), float(s[1])]


# -- subcommands ---------------------------------------------------------------

def cmd_threshold(args) -> dict:
    _need(args, "a")
    if args.counts is not None:
        t = multilevel.threshold_levels(args.a, args.counts)
    else:
        _need(args, "n")
        t = reduced_map.threshold(args.a, args.n)
    report = {"threshold": t}
    if args.b is not None:
        Params(args.a, args.b)
        if args.b < t:
            regime = reduced_map.Regime.SUBCRITICAL
        elif args.b == t:
            regime = reduced_map.Regime.CRITICAL
        else:
            regime = reduced_map.Regime.SUPERCRITICAL
        report["regime"] = regime.value
    return report


def cmd_fixed_point(args) -> dict:
    p = _params(args)
    if args.scalar:
        rep = scalar.scalar_report(p)
        return {"trivial": 0.0, "nontrivial": rep.x_f, "x_c": rep.x_c,
                "regime": "Supercritical" if rep.supercritical else "Subcritical",
                "f_prime_at_0": rep.f_prime_at_0, "f_prime_at_1": rep.f_prime_at_1}
    if args.counts is not None:
        lp = multilevel.LevelParams(p, tuple(args.counts))
        fp = multilevel.solve_fixed_point_multilevel(lp, max_iters=max(args.max_iters, 1))
        t = multilevel.threshold_levels(p.a, args.counts)
        return {"trivial": [0.0] * lp.levels,
                "nontrivial": None if fp is None else list(fp),
                "residual": 0.0 if fp is None else multilevel.level_residual(lp, fp),
                "threshold": t,
                "regime": "Supercritical" if fp is not None else "Subcritical"}
    sp = _star(args)
    rep = reduced_map.solve_fixed_points(sp)
    return {"trivial": _pair(rep.trivial), "nontrivial": _pair(rep.nontrivial),
            "residual": rep.residual, "regime": rep.regime.value}


def _level_limit_kind(lp, s, tol) -> str:
    if float(np.max(np.abs(s))) < dynamics.PROXIMITY * tol:
        return dynamics.LimitKind.TRIVIAL.value
    # both the orbit and the solver stop on step size, so they can sit a few
    # step-lengths apart; match on a fixed absolute window instead
    fp = multilevel.solve_fixed_point_multilevel(lp)
    if fp is not None and float(np.max(np.abs(s - fp))) < LEVEL_MATCH:
        return dynamics.LimitKind.NONTRIVIAL.value
    return dynamics.LimitKind.UNRESOLVED.value


def cmd_iterate(args) -> tuple[dict, list | None, list[str] | None]:
    p = _params(args)
    if args.scalar:
        x0 = args.start[0] if args.start else 0.5
        if args.start is not None and len(args.start) != 1:
            raise DimensionError("--scalar takes a single start value")
        res = scalar.iterate_scalar(p, x0, args.max_iters, args.tol)
        report = {"limit": res.limit, "limit_kind": res.limit_kind.value,
                  "iterations": res.iterations}
        trace = None
        if args.trace:
            xs = [scalar._unit(x0)]
            for _ in range(res.iterations):
                xs.append(scalar.f_scalar(p, xs[-1]))
            trace = [[t, x] for t, x in enumerate(xs)]
        return report, trace, ["t", "x"]
    if args.counts is not None:
        lp = multilevel.LevelParams(p, tuple(args.counts))
        s0 = args.start if args.start is not None else [0.5] * lp.levels
        s, k, settled, path = multilevel.iterate_levels(lp, s0, args.max_iters, args.tol,
                                                        record=args.trace)
        kind = (_level_limit_kind(lp, s, args.tol) if settled
                else dynamics.LimitKind.UNRESOLVED.value)
        report = {"limit": list(s), "limit_kind": kind, "iterations": k}
        header = ["t"] + [f"s{i + 1}" for i in range(lp.levels)]
        trace = [[t, *row] for t, row in enumerate(path)] if args.trace else None
        return report, trace, header
    sp = _star(args)
    s0 = args.start if args.start is not None else [0.5, 0.5]
    if len(s0) != 2:
        raise DimensionError("--start needs x,y for the star map")
    traj = dynamics.iterate(sp, s0, args.max_iters, args.tol)
    report = {"limit": _pair(traj.final), "limit_kind": traj.limit_kind.value,
              "iterations": traj.iterations_used}
    trace = [[t, x, y] for t, (x, y) in enumerate(traj.points)] if args.trace else None
    return report, trace, ["t", "x", "y"]


def _sweep_row(a, b, n) -> list:
    sp = reduced_map.StarParams.of(a, b, n)
    rep = reduced_map.solve_fixed_points(sp)
    if rep.nontrivial is None:
        return [a, b, n, rep.regime.value, None, None, None]
    lam = float(spectral.eig2(spectral.jacobian(sp, rep.nontrivial)).lambda1)
    return [a, b, n, rep.regime.value, rep.nontrivial.x, rep.nontrivial.y, lam]


def _axis(spec) -> np.ndarray:
    lo, hi, count = spec
    if count < 1:
        raise ParameterError("sweep range has no points")
    return np.linspace(lo, hi, count)


def cmd_sweep(args) -> list[list]:
    if args.line_m is not None:
        _need(args, "steps")
        if args.steps < 1:
            raise ParameterError("--steps must be positive")
        if args.steps == 1:
            raise ParameterError("--steps must be at least 2")
        return [[r.a, r.b, 2, reduced_map.Regime.SUPERCRITICAL.value, r.x_f, r.y_f, r.lambda1]
                for r in spectral.eigen_sweep_line(args.line_m, args.steps)]
    _need(args, "a_range", "b_range", "n")
    return [_sweep_row(float(a), float(b), args.n)
            for a in _axis(args.a_range) for b in _axis(args.b_range)]


def cmd_validate(args) -> dict:
    p = _params(args)
    rng = np.random.default_rng(args.seed)
    steps = args.validate_steps
    if steps < 1:
        raise ParameterError("--steps must be positive")
    if args.counts is not None:
        lp = multilevel.LevelParams(p, tuple(args.counts))
        topo = build_multilevel_star(args.counts)
        lv = np.asarray(topo.levels)
        s = rng.uniform(0.0, 1.0, lp.levels)
        state = s[lv]
        worst = 0.0
        for _ in range(steps):
            state = step_full(topo, p, state)
            s = np.asarray(reduced_level_step(lp, s), dtype=float)
            worst = max(worst, float(np.max(np.abs(state - s[lv]))))
        het = rng.uniform(0.0, 1.0, topo.node_count)
        spread0 = float(np.max(level_spreads(topo, het)))
        for _ in range(steps):
            het = step_full(topo, p, het)
        spread1 = float(np.max(level_spreads(topo, het)))
    else:
        sp = _star(args)
        topo = build_star(sp.n)
        x, y = rng.uniform(0.0, 1.0, 2)
        state = np.array([x] + [y] * sp.n)
        worst = 0.0
        for _ in range(steps):
            state = step_full(topo, p, state)
            x, y = reduced_star_step(sp, (x, y))
            worst = max(worst, abs(state[0] - x), float(np.max(np.abs(state[1:] - y))))
        het = rng.uniform(0.0, 1.0, topo.node_count)
        spread0 = spoke_spread(topo, het)
        for _ in range(steps):
            het = step_full(topo, p, het)
        spread1 = spoke_spread(topo, het)
    decays = spread1 <= spread0
    report = {"steps": steps, "max_discrepancy": worst, "tol": args.tol,
              "spread_initial": spread0, "spread_final": spread1, "spread_decays": decays,
              "pass": bool(worst <= args.tol and decays)}
    if not report["pass"]:
        raise ValidationFailure(report)
    return report


def cmd_classify(args) -> dict:
    sp = _star(args)
    if args.flip:
        rep = dynamics.flip_classifier(sp, args.samples, seed=args.seed)
        return {"label": rep.label.value, "transitions": rep.transitions,
                "in_region": rep.in_region, "samples_drawn": rep.samples_drawn}
    _need(args, "point")
    if len(args.point) != 2:
        raise DimensionError("--point needs x,y")
    return {"point": args.point, "region": dynamics.classify_region(sp, args.point).value}


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(args) -> int:
    fmt = args.format
    cmd = args.command
    if cmd == "threshold":
        text = render(cmd_threshold(args), fmt)
    elif cmd == "fixed-point":
        text = render(cmd_fixed_point(args), fmt)
    elif cmd == "iterate":
        report, trace, header = cmd_iterate(args)
        if trace is not None and fmt == "csv":
            text = to_csv(header, trace)
        else:
            if trace is not None:
                report["trace"] = trace
            text = render(report, fmt)
    elif cmd == "sweep":
        rows = cmd_sweep(args)
        if fmt == "csv":
            text = to_csv(SWEEP_COLUMNS, rows)
        else:
            text = to_json({"columns": list(SWEEP_COLUMNS), "rows": rows})
    elif cmd == "validate":
        text = render(cmd_validate(args), fmt)
    else:
        text = render(cmd_classify(args), fmt)
    _emit(text, args.output)
    return EXIT_OK


USAGE_ERRORS = (UsageError, ParameterError, StateRangeError, DimensionError, RegimeError,
                CurveExitError, RegionError)
SOLVER_ERRORS = (ConvergenceError, ClosedFormSingularError, InsufficientSamplesError)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = resolve(args)
        return run(args)
    except ValidationFailure as exc:
        _emit(render(exc.report, args.format), args.output)
        print("starsis: validation failed", file=sys.stderr)
        return EXIT_VALIDATION
    except USAGE_ERRORS as exc:
        print(f"starsis: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SOLVER_ERRORS as exc:
        print(f"starsis: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"starsis: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
