"""Command line front end.

    zermelo verify <scenario.json> [--seed N] [--levels N] [--samples N]
                                   [--tol-abs X] [--tol-rel X] [--csv-dir DIR]
    zermelo selftest [--tol-abs X] [--tol-rel X] [--seed N]
    zermelo expr-check <text>

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 unsupported hypothesis.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .config import DEFAULT, Tolerances
from .core import DomainError
from .expr import ExprError, Expression
from .hypersurfaces import UnsupportedHypothesis
from .isoparametric import SamplingError
from .randers import ConsistencyError
from .scenario import (
    ConfigError,
    Scenario,
    load_scenario,
    run_isoparametric_suite,
    run_metric_suite,
    run_shift_suite,
    write_csv,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_HYPOTHESIS = 0, 1, 2, 3


def _apply_overrides(sc: Scenario, args) -> Scenario:
    if args.seed is not None:
        sc.seed = args.seed
    if getattr(args, "levels", None) is not None:
        if args.levels < 2:
            raise ConfigError("--levels must be at least 2")
        sc.levels = args.levels
        sc.level_values = None
    if getattr(args, "samples", None) is not None:
        if args.samples < 1:
            raise ConfigError("--samples must be positive")
        sc.count = args.samples
    sc.tol = sc.tol.with_overrides(spread_abs=args.tol_abs, spread_rel=args.tol_rel)
    return sc


def run_scenario(sc: Scenario, csv_dir=None, out=None) -> int:
    """Run every suite the scenario requests; returns the exit code."""
    out = out or sys.stdout
    print(f"scenario {sc.name}: dim {sc.space.dim}, curvature {sc.space.curvature:g}, chart {sc.space.chart}", file=out)
    results = []
    try:
        m = sc.metric()
        if sc.metric_checks:
            results.append(run_metric_suite(sc, m))
        if sc.hypersurface is not None:
            results.append(run_shift_suite(sc, m))
        if sc.function is not None:
            res, sv, _ = run_isoparametric_suite(sc)
            results.append(res)
            if csv_dir is not None:
                path = write_csv(f"{csv_dir}/{sc.name}.csv", sv)
                res.note(f"wrote {path}")
    except UnsupportedHypothesis as exc:
        for r in results:
            _print_suite(r, out)
        print(f"hypothesis failure: {exc}", file=out)
        return EXIT_HYPOTHESIS
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=out)
        return EXIT_CONFIG
    except (ConsistencyError, SamplingError, DomainError) as exc:
        for r in results:
            _print_suite(r, out)
        print(f"verification failure: {type(exc).__name__}: {exc}", file=out)
        return EXIT_FAIL
    for r in results:
        _print_suite(r, out)
    if not results:
        print("nothing to verify: request metric_checks, a hypersurface or a function", file=out)
        return EXIT_CONFIG
    ok = all(r.passed for r in results)
    print("RESULT " + ("PASS" if ok else "FAIL"), file=out)
    return EXIT_OK if ok else EXIT_FAIL


def _print_suite(r, out):
    print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}", file=out)
    for line in r.lines:
        print(line, file=out)


# selftest -----------------------------------------------------------------------------

def _suite_core(tol: Tolerances, seed: int) -> bool:
    from .core import fd_check, sqrt

    rng = np.random.default_rng(seed)
    f = lambda x: sqrt(1.0 + x[0] ** 2 + x[0] * x[1] ** 3) + x[1] / (2.0 + x[0] ** 2)  # noqa: E731
    return all(fd_check(f, rng.uniform(-0.5, 0.5, 2)).max_error < 1e-6 for _ in range(3))


def _suite_riemannian(tol: Tolerances, seed: int) -> bool:
    from .riemannian import SpaceForm, sectional_curvature

    rng = np.random.default_rng(seed)
    ok = True
    for c, chart in [(0.0, "cartesian"), (-1.0, "poincare_ball"), (1.0, "stereographic"), (0.5, "beltrami")]:
        sp = SpaceForm(3, c, chart)
        x = sp.sample(rng, 1, 0.5 * sp.default_radius())[0]
        K = sectional_curvature(sp, x, rng.normal(size=3), rng.normal(size=3))
        ok &= abs(K - c) < 1e-8
    return ok


def _suite_expr(tol: Tolerances, seed: int) -> bool:
    from .expr import parse_expr, to_text

    texts = ["x1^2 - x2^2", "-x1^2 * (x2 - x3) / (1 + exp(-x1))", "sqrt(abs2(block(1,3))) - dot(block(1,1),block(2,2))"]
    ok = all(parse_expr(to_text(parse_expr(t))) == parse_expr(t) for t in texts)
    try:
        parse_expr("(x1 + x2")
        ok = False
    except ExprError as exc:
        ok &= exc.column == 9
    return ok


def _suite_kernels(tol: Tolerances, seed: int) -> bool:
    from . import kernels
    from .randers import randers_from
    from .riemannian import SpaceForm, affine_field

    rng = np.random.default_rng(seed)
    sp = SpaceForm(3, -1.0, "poincare_ball")
    W = affine_field(3, e=[0.05, 0.0, 0.02])
    X = sp.sample(rng, 200, 0.5)
    H, Wup, Y = sp.metric_batch(X), W.eval_batch(X), rng.normal(size=(200, 3))
    a = kernels.navigation_batch_numpy(H, Wup, Y)
    b = kernels.navigation_batch_numba(H, Wup, Y)
    m = randers_from(sp, W)
    g = m.fundamental_tensor_batch(X[:5], Y[:5])
    g_ref = np.array([m.fundamental_tensor(x, y) for x, y in zip(X[:5], Y[:5])])
    return all(np.allclose(u, v, rtol=1e-12, atol=1e-12) for u, v in zip(a, b)) and np.allclose(g, g_ref, atol=1e-12)


def _scenario_suite(name: str, seed: int, tol: Tolerances, **reduce):
    from .scenario import parse_scenario, shipped_scenarios
    import json

    data = json.loads(shipped_scenarios()[name].read_text())
    sc = parse_scenario(data)
    sc.seed = seed
    sc.tol = tol
    for k, v in reduce.items():
        setattr(sc, k, v)
    return sc


def _suite_randers(tol: Tolerances, seed: int) -> bool:
    sc = _scenario_suite("funk_like_disk", seed, tol, metric_samples=200)
    return run_metric_suite(sc, oracle_points=4, flags=3).passed


def _suite_shift(tol: Tolerances, seed: int) -> bool:
    sc = _scenario_suite("funk_like_disk", seed, tol)
    r1 = run_shift_suite(sc, points=3)
    sc = _scenario_suite("sphere_quadric", seed, tol)
    r2 = run_shift_suite(sc, points=2)
    try:
        run_shift_suite(_scenario_suite("squared_wind", seed, tol), points=1)
        return False
    except UnsupportedHypothesis:
        pass
    return r1.passed and r2.passed


def _suite_isoparametric(tol: Tolerances, seed: int) -> bool:
    ok = True
    for name in ("funk_like_disk", "sphere_quadric", "parabola_negative"):
        sc = _scenario_suite(name, seed, tol, levels=3, count=4)
        res, _, _ = run_isoparametric_suite(sc)
        ok &= res.passed
    return ok


SELFTEST_SUITES = [
    ("autodiff vs finite differences", _suite_core),
    ("sectional curvature of space forms", _suite_riemannian),
    ("expression parser round trip", _suite_expr),
    ("batch kernels numba vs numpy", _suite_kernels),
    ("Randers metric identities", _suite_randers),
    ("principal curvature shift", _suite_shift),
    ("isoparametric criteria", _suite_isoparametric),
]


def selftest(tol: Tolerances = DEFAULT, seed: int = 0, out=None) -> int:
    out = out or sys.stdout
    failed = 0
    for name, fn in SELFTEST_SUITES:
        t0 = time.perf_counter()
        try:
            ok = bool(fn(tol, seed))
            detail = ""
        except Exception as exc:  # a crashing suite is a failing suite
            ok = False
            detail = f": {type(exc).__name__}: {exc}"
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name} ({time.perf_counter() - t0:.1f}s){detail}", file=out)
    return EXIT_OK if failed == 0 else EXIT_FAIL


# argument parsing ---------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None, help="random seed")
    p.add_argument("--tol-abs", type=float, default=None, help="absolute per-level spread tolerance")
    p.add_argument("--tol-rel", type=float, default=None, help="relative per-level spread tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zermelo", description="Randers navigation workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a scenario file")
    v.add_argument("scenario")
    _common(v)
    v.add_argument("--levels", type=int, default=None, help="number of interior levels")
    v.add_argument("--samples", type=int, default=None, help="points per level")
    v.add_argument("--csv-dir", default=None, help="directory for per-point CSV output")

    s = sub.add_parser("selftest", help="run the built-in invariant suites")
    _common(s)

    e = sub.add_parser("expr-check", help="parse an expression and print its canonical form")
    e.add_argument("text")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "expr-check":
        try:
            ex = Expression.parse(args.text)
        except ExprError as exc:
            print(f"error: {exc}")
            return EXIT_CONFIG
        print(ex.canonical())
        print(f"uses coordinates up to x{ex.min_dim}" if ex.min_dim else "constant expression")
        return EXIT_OK
    if args.command == "selftest":
        tol = DEFAULT.with_overrides(spread_abs=args.tol_abs, spread_rel=args.tol_rel)
        return selftest(tol, 0 if args.seed is None else args.seed)
    try:
        sc = _apply_overrides(load_scenario(args.scenario), args)
    except ConfigError as exc:
        print(f"configuration error: {exc}")
        return EXIT_CONFIG
    return run_scenario(sc, args.csv_dir)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
