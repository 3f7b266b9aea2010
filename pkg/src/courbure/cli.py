"""Command-line front end: solve, modulus, drlab, quasimax, selftest.

Every command accepts ``--config FILE``, a flat ``key = value`` file whose
keys are the long option names (``-`` or ``_`` both accepted).  Options given
on the command line override the file.  Exit codes: 0 success, 1 bad
configuration, 2 a computation that did not converge or a check that failed.
"""
from __future__ import annotations

import argparse
import ast
import math
import operator
import os
import sys
from pathlib import Path
from typing import Callable

import numpy as np


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


# expression grammar for target curvatures

_FUNCTIONS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "sech": lambda x: 1.0 / np.cosh(x), "abs": np.abs,
}
_CONSTANTS = {"pi": math.pi, "e": math.e}
_VARIABLES = ("theta", "t", "rho")
_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def compile_expression(text: str, key: str = "kappa") -> Callable:
    """Parse an arithmetic expression in theta, t, rho into a vectorised function.

    Allowed: numbers, pi, e, + - * / and ** (or ^), and the functions in
    ``_FUNCTIONS``.  Anything else raises :class:`ConfigError` naming ``key``.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(key, f"cannot parse {text!r}: {exc.msg}") from None

    def check(node):
        if isinstance(node, ast.Expression):
            return check(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return
        if isinstance(node, ast.Name):
            if node.id not in _VARIABLES and node.id not in _CONSTANTS:
                raise ConfigError(key, f"unknown name {node.id!r} in {text!r}")
            return
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            check(node.left)
            check(node.right)
            return
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return check(node.operand)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in _FUNCTIONS and len(node.args) == 1 and not node.keywords:
            return check(node.args[0])
        raise ConfigError(key, f"unsupported syntax in {text!r}")

    check(tree)

    def evaluate(node, env):
        if isinstance(node, ast.Expression):
            return evaluate(node.body, env)
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else _CONSTANTS[node.id]
        if isinstance(node, ast.BinOp):
            return _BINARY[type(node.op)](evaluate(node.left, env), evaluate(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](evaluate(node.operand, env))
        return _FUNCTIONS[node.func.id](evaluate(node.args[0], env))

    def fn(theta, t, rho):
        env = {"theta": theta, "t": t, "rho": rho}
        with np.errstate(all="ignore"):
            out = evaluate(tree, env)
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(theta, t, rho).shape)

    return fn


# configuration

def read_config_file(path) -> dict:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}", f"expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip("\"'")
    return out


def merge_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> argparse.Namespace:
    """Fill options not given on the command line from ``--config``, then from defaults.

    Parsers are built with ``argparse.SUPPRESS`` defaults, so absent options
    are missing from ``args``; the real defaults live in ``parser.courbure_defaults``.
    """
    known = {a.dest: a for a in parser._actions if a.dest not in ("help", "config", "command")}
    merged = dict(parser.courbure_defaults)
    if getattr(args, "config", None):
        for key, text in read_config_file(args.config).items():
            if key not in known:
                raise ConfigError(key, f"unknown key for '{parser.prog.split()[-1]}'")
            action = known[key]
            if action.type is None and isinstance(action.const, bool):
                merged[key] = _parse_bool(key, text)
            else:
                try:
                    merged[key] = action.type(text) if action.type else text
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise ConfigError(key, str(exc) or f"bad value {text!r}") from None
    for key, value in vars(args).items():
        merged[key] = value
    return argparse.Namespace(**merged)


def _parse_bool(key, text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


def float_list(text: str) -> list[float]:
    try:
        vals = [float(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def thread_count() -> int:
    raw = os.environ.get("COURBURE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError("COURBURE_THREADS", f"expected an integer, got {raw!r}") from None


# commands

def _require(args, key, check, message):
    if not check(getattr(args, key)):
        raise ConfigError(key, message)


def cmd_solve(args) -> int:
    from .geometry import conformal_change_curvature, poincare_cap_chart
    from .grid import ScalarField
    from .output import write_csv
    from .solver import (NewtonDidNotConverge, PrescriptionProblem, ProblemError, StepControl,
                         continuation_solve)

    _require(args, "preset", lambda v: v == "hyperbolic",
             "only 'hyperbolic' has a negatively curved background")
    _require(args, "R", lambda v: v > 0, "must be positive")
    _require(args, "n", lambda v: v >= 16, "must be at least 16")
    _require(args, "tol", lambda v: v > 0, "must be positive")
    kappa_fn = compile_expression(args.kappa, "kappa")
    chart, kappa0 = poincare_cap_chart(args.R, args.n, args.n)
    Theta, T = chart.grid.mesh()
    Rho = np.repeat(chart.rho[:, None], chart.grid.n_theta, axis=1)
    values = np.array(kappa_fn(Theta, T, Rho), dtype=float)
    if not np.all(np.isfinite(values)):
        raise ConfigError("kappa", "expression is not finite on the chart")
    try:
        problem = PrescriptionProblem(chart, kappa0, ScalarField(chart.grid, values))
    except ProblemError as exc:
        raise ConfigError("kappa", str(exc)) from None

    out = Path(args.out)
    control = StepControl(tol=args.tol)
    try:
        u, report = continuation_solve(problem, control)
    except NewtonDidNotConverge as exc:
        print(f"solve: did not converge ({exc})", file=sys.stderr)
        if exc.report is not None:
            write_csv(out / "report.csv", _report_columns(), exc.report.rows())
        return 2

    # fourth-order recompute: abs_err then measures the solver's discretisation error
    rec = conformal_change_curvature(kappa0, u, chart, order=4).values.copy()
    rec[:2] = rec[-2:] = np.nan
    err = np.abs(rec - values)
    rows = zip(Theta.ravel(), T.ravel(), u.values.ravel(), rec.ravel(), values.ravel(), err.ravel())
    write_csv(out / "u.csv", ("theta", "t", "u", "kappa_recomputed", "kappa_target", "abs_err"), rows)
    write_csv(out / "report.csv", _report_columns(), report.rows())
    budget = 10 * chart.grid.h ** 2
    interior = float(np.nanmax(err))
    print(f"converged in {len(report.steps) - 1} continuation steps; "
          f"max |u| = {np.abs(u.values).max():.6e}")
    print(f"interior curvature error {interior:.3e} (h^2 budget {budget:.3e}); "
          f"a-priori bounds [{report.bounds[0]:.6f}, {report.bounds[1]:.6f}] "
          f"{'respected' if report.bounds_ok else 'VIOLATED'}")
    print(f"wrote {out / 'u.csv'} and {out / 'report.csv'}")
    return 0


def _report_columns():
    from .solver import REPORT_COLUMNS
    return REPORT_COLUMNS


def _profile_from_args(args):
    from .geometry import profile_preset
    params = {}
    if args.profile == "dr":
        _require(args, "r", lambda v: v >= 2, "D_r needs r >= 2")
        _require(args, "collar", lambda v: 0 < v <= 1, "must lie in (0, 1]")
        params = {"r": args.r, "collar": args.collar}
    elif args.rho_max is not None:
        _require(args, "rho_max", lambda v: v > 0, "must be positive")
        params = {"rho_max": args.rho_max}
    return profile_preset(args.profile, **params)


def cmd_modulus(args) -> int:
    from .modulus import EXTREMAL_COLUMNS, extremal_trials, modulus_revolution
    from .output import write_csv

    profile = _profile_from_args(args)
    b = profile.rho_max if args.b is None else args.b
    _require(args, "a", lambda v: 0 < v <= b, "need 0 < a <= b")
    if not b <= profile.rho_max:
        raise ConfigError("b", f"exceeds rho_max = {profile.rho_max}")
    print(f"{modulus_revolution(profile, args.a, b):.15e}")
    if args.trials:
        _require(args, "seed", lambda v: v is not None, "randomised trials need a seed")
        _require(args, "M", lambda v: v > 0, "must be positive")
        reports = extremal_trials(args.M, args.trials, args.seed)
        path = Path(args.out) / "extremal.csv"
        write_csv(path, EXTREMAL_COLUMNS,
                  ((i, r.L, r.area, r.lhs, r.bound, r.slack) for i, r in enumerate(reports)))
        worst = max(r.rel_excess for r in reports)
        print(f"{len(reports)} extremal-length trials on S^1 x (0, {args.M:g}): "
              f"worst lhs/bound - 1 = {worst:.3e}; wrote {path}")
    return 0


def cmd_drlab(args) -> int:
    from .revolution_lab import DR_COLUMNS, dr_sweep, sweep_claims, write_dr_csv, write_dr_svg

    _require(args, "r", lambda v: all(x >= 2 for x in v), "every r must be >= 2")
    _require(args, "collar", lambda v: 0 < v <= 1, "must lie in (0, 1]")
    reports = dr_sweep(args.r, args.collar, workers=thread_count())
    out = Path(args.out)
    write_dr_csv(out / "dr.csv", reports)
    print("# deriv_norm: |D Pi(0)| from the Poincare metric 4|dz|^2/(1-|z|^2)^2 "
          "to the surface metric, = exp(T - c0)/2")
    print(",".join(DR_COLUMNS))
    for rep in reports:
        print(",".join(f"{x:.12e}" for x in rep.row()))
    if args.plot:
        write_dr_svg(out / "dr.svg", reports)
    claims = sweep_claims(reports)
    for name, ok in claims.items():
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
    return 0 if all(claims.values()) else 2


def cmd_quasimax(args) -> int:
    from .quasimax import random_trials

    _require(args, "seed", lambda v: v is not None, "randomised trials need a seed")
    _require(args, "trials", lambda v: v > 0, "must be positive")
    _require(args, "points", lambda v: v >= 4, "must be at least 4")
    summary = random_trials(args.trials, args.seed, args.points)
    print(f"passed {summary.passed} / failed {summary.trials - summary.passed} "
          f"of {summary.trials} trials")
    return 0 if summary.ok else 2


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    results = run_all(lambda line: print(line, flush=True))
    passed = sum(r.passed for r in results)
    total = sum(r.seconds for r in results)
    print(f"{passed}/{len(results)} criteria passed in {total:.1f}s")
    return 0 if passed == len(results) else 2


# parser

def _sub(subs, name, help_text, defaults: dict, handler):
    p = subs.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS,
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--config", help="key = value file; command-line options win")
    p.courbure_defaults = defaults
    p.set_defaults(handler=handler)
    return p


def _opt(p, flag, default, help_text, **kw):
    p.add_argument(flag, help=f"{help_text} (default: {default})", **kw)
    p.courbure_defaults[flag.lstrip("-").replace("-", "_")] = default


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="courbure",
                                     description="Prescribed negative curvature, conformal moduli "
                                                 "and uniformisation of disks of revolution.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = _sub(subs, "solve", "prescribe curvature -kappa on a hyperbolic cap", {}, cmd_solve)
    _opt(p, "--preset", "hyperbolic", "background chart")
    _opt(p, "--R", 4.0, "geodesic radius of the cap", type=float)
    _opt(p, "--kappa", "1", "target kappa(theta, t, rho); curvature is -kappa")
    _opt(p, "--n", 128, "nodes per axis", type=int)
    _opt(p, "--tol", 1e-9, "Newton residual tolerance", type=float)
    _opt(p, "--out", ".", "output directory")

    p = _sub(subs, "modulus", "modulus of a revolution annulus a < rho < b", {}, cmd_modulus)
    _opt(p, "--profile", "hyperbolic", "hyperbolic, euclidean, sphere-cap or dr")
    _opt(p, "--a", 1.0, "inner radius", type=float)
    _opt(p, "--b", None, "outer radius (default rho_max)", type=float)
    _opt(p, "--r", 4.0, "r for the dr profile", type=float)
    _opt(p, "--collar", 1.0, "collar width for the dr profile", type=float)
    _opt(p, "--rho-max", None, "radius of the truncated disk", type=float)
    _opt(p, "--trials", 0, "random-density extremal-length trials to run", type=int)
    _opt(p, "--M", 1.0, "height of the flat cylinder for the trials", type=float)
    _opt(p, "--seed", None, "RNG seed, required with --trials", type=int)
    _opt(p, "--out", ".", "output directory")

    p = _sub(subs, "drlab", "uniformisation of the D_r family", {}, cmd_drlab)
    _opt(p, "--r", [3.0, 4.0, 5.0, 6.0], "comma-separated values of r", type=float_list)
    _opt(p, "--collar", 1.0, "width of the smoothing collar", type=float)
    _opt(p, "--out", ".", "output directory")
    _opt(p, "--plot", False, "also write dr.svg", action="store_true")

    p = _sub(subs, "quasimax", "randomised quasi-maximum trials", {}, cmd_quasimax)
    _opt(p, "--trials", 1000, "number of trials", type=int)
    _opt(p, "--seed", None, "RNG seed (required)", type=int)
    _opt(p, "--points", 200, "points per space", type=int)

    _sub(subs, "selftest", "run the acceptance suite", {}, cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        thread_count()
        cfg = merge_config(sub, args)
        return cfg.handler(cfg)
    except ConfigError as exc:
        print(f"courbure {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
