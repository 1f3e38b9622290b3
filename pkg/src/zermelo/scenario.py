"""Scenario files and the verification suites they request.

A scenario is a JSON object::

    {
      "name": "funk_like_disk",
      "space": {"dim": 2, "curvature": 0.0, "chart": "cartesian"},
      "wind": {"kind": "affine", "k0": 0.25, "Q_upper": [], "e": [0, 0]},
      "metric_checks": true,
      "function": {"builtin": "norm2"},
      "hypersurface": {"entry": "hypersphere", "params": {"r": 1.0}},
      "sampling": {"levels": 7, "count": 12, "seed": 0, "radius": 1.5},
      "tolerances": {"spread_abs": 1e-6},
      "expect": {"verdict": "isoparametric"}
    }

Wind kinds: ``zero``, ``affine`` (k0, Q, e), ``projective`` (Q, e),
``sphere_rotation`` (Q of size n+1) and ``custom`` (one expression per
component).  Q is given either as ``Q_upper`` (row-major strict upper
triangle) or as a full antisymmetric matrix ``Q``.  Functions: ``builtin``,
``expression`` or ``homogeneous`` with ``degree``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import DEFAULT, Tolerances
from .core import DomainError
from .expr import ExprError, Expression
from .hypersurfaces import CATALOG, UnsupportedHypothesis, catalog, induced_metric, verify_shift
from .isoparametric import (
    BUILTINS,
    Setting,
    Survey,
    assess,
    builtin_field,
    homogeneous_field,
    parsed_field,
    survey,
)
from .randers import NavigationSpec, RandersMetric
from .riemannian import (
    CHARTS,
    SpaceForm,
    _upper_to_antisym,
    affine_field,
    antisym_upper,
    classify_field,
    custom_field,
    projective_field,
    sphere_rotation_field,
)


class ConfigError(ValueError):
    pass


WIND_KINDS = ("zero", "affine", "projective", "sphere_rotation", "custom")
CSV_COLUMNS = ("level", "coordinates", "F_grad", "lap_F", "df_h", "lap_h", "df_W")


@dataclass
class Scenario:
    name: str
    space: SpaceForm
    wind: object  # VectorFieldSpec
    Q_ambient: np.ndarray | None
    metric_checks: bool
    function: dict | None
    hypersurface: dict | None
    levels: int = 7
    count: int = 12
    seed: int = 0
    radius: float | None = None
    level_values: list | None = None
    metric_samples: int = 1000
    tol: Tolerances = DEFAULT
    expect: dict = field(default_factory=dict)

    def metric(self) -> RandersMetric:
        return RandersMetric(NavigationSpec(self.space, self.wind), self.tol)


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing key {key!r}")
    return d[key]


def _antisym(spec: dict, size: int, where: str) -> np.ndarray:
    try:
        if "Q" in spec:
            Q = np.asarray(spec["Q"], dtype=float)
            if Q.shape != (size, size):
                raise ConfigError(f"{where}: Q must be {size}x{size}")
            antisym_upper(Q)
            return Q
        return _upper_to_antisym(size, spec.get("Q_upper", []))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _vector(spec: dict, key: str, size: int, where: str):
    v = spec.get(key)
    if v is None:
        return None
    v = np.asarray(v, dtype=float)
    if v.shape != (size,):
        raise ConfigError(f"{where}: {key} must have {size} entries")
    return v


def _build_wind(spec: dict, space: SpaceForm):
    kind = spec.get("kind", "zero")
    n = space.dim
    where = "wind"
    if kind not in WIND_KINDS:
        raise ConfigError(f"wind: unknown kind {kind!r}; expected one of {WIND_KINDS}")
    if kind == "zero":
        return affine_field(n, label="zero"), None
    if kind == "affine":
        Q = _antisym(spec, n, where)
        return affine_field(n, float(spec.get("k0", 0.0)), Q, _vector(spec, "e", n, where)), None
    if kind == "projective":
        Q = _antisym(spec, n, where)
        return projective_field(n, space.curvature, Q, _vector(spec, "e", n, where)), None
    if kind == "sphere_rotation":
        if space.curvature <= 0 or space.chart not in ("stereographic", "beltrami"):
            raise ConfigError("wind: sphere_rotation needs a positively curved stereographic or beltrami chart")
        Q = _antisym(spec, n + 1, where)
        return sphere_rotation_field(space, Q), Q
    comps = _need(spec, "components", where)
    if len(comps) != n:
        raise ConfigError(f"wind: custom field needs {n} components")
    try:
        exprs = [Expression.parse(str(c)) for c in comps]
    except ExprError as exc:
        raise ConfigError(f"wind: {exc}") from None
    if max(e.min_dim for e in exprs) > n:
        raise ConfigError("wind: component uses a coordinate beyond the chart dimension")

    def comp(x):
        return np.array([e(x) for e in exprs], dtype=object if x.dtype == object else float)

    return custom_field(n, comp, label="custom"), None


def parse_scenario(data: dict, name: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a JSON object")
    sp = _need(data, "space", "scenario")
    try:
        space = SpaceForm(int(_need(sp, "dim", "space")), float(sp.get("curvature", 0.0)), sp.get("chart", "cartesian"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"space: {exc}; charts are {CHARTS}") from None
    wind, Q = _build_wind(data.get("wind", {"kind": "zero"}), space)
    samp = data.get("sampling", {})
    try:
        tol = DEFAULT.with_overrides(**data.get("tolerances", {}))
    except TypeError as exc:
        raise ConfigError(f"tolerances: {exc}") from None
    func = data.get("function")
    if func is not None:
        keys = {"builtin", "expression", "homogeneous"} & set(func)
        if len(keys) != 1:
            raise ConfigError("function: give exactly one of builtin, expression, homogeneous")
        if "builtin" in func and func["builtin"] not in BUILTINS:
            raise ConfigError(f"function: unknown builtin {func['builtin']!r}; expected one of {sorted(BUILTINS)}")
        if "homogeneous" in func:
            if "degree" not in func:
                raise ConfigError("function: homogeneous needs a degree")
            if space.curvature != 1.0 or space.chart not in ("stereographic", "beltrami"):
                raise ConfigError("function: homogeneous fields live on the unit sphere chart")
            if wind.kind == "affine" and (wind.k0 or wind.q_upper or wind.e):
                raise ConfigError("function: homogeneous fields need a zero or sphere_rotation wind")
    hyp = data.get("hypersurface")
    if hyp is not None:
        if _need(hyp, "entry", "hypersurface") not in CATALOG:
            raise ConfigError(f"hypersurface: unknown catalog entry {hyp['entry']!r}; expected one of {CATALOG}")
        try:
            catalog(hyp["entry"], space, **hyp.get("params", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"hypersurface: {exc}") from None
    try:
        return Scenario(
            name=str(data.get("name", name)),
            space=space,
            wind=wind,
            Q_ambient=Q,
            metric_checks=bool(data.get("metric_checks", False)),
            function=func,
            hypersurface=hyp,
            levels=int(samp.get("levels", 7)),
            count=int(samp.get("count", 12)),
            seed=int(samp.get("seed", 0)),
            radius=None if samp.get("radius") is None else float(samp["radius"]),
            level_values=samp.get("level_values"),
            metric_samples=int(samp.get("metric_samples", 1000)),
            tol=tol,
            expect=dict(data.get("expect", {})),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sampling: {exc}") from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scenario(data, path.stem)


# suites ------------------------------------------------------------------------------

@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    lines: list = field(default_factory=list)

    def check(self, label: str, value: float, limit: float) -> bool:
        ok = bool(value < limit)
        self.lines.append(f"  {label}: {value:.3e} (limit {limit:.0e}) {'ok' if ok else 'FAIL'}")
        self.passed = self.passed and ok
        return ok

    def note(self, text: str):
        self.lines.append(f"  {text}")

    def require(self, label: str, ok: bool):
        self.lines.append(f"  {label}: {'ok' if ok else 'FAIL'}")
        self.passed = self.passed and bool(ok)


def _admissible_points(m: RandersMetric, rng, count: int, radius) -> np.ndarray:
    space = m.nav.space
    pts = []
    tries = 0
    while len(pts) < count:
        tries += 1
        if tries > 50:
            raise DomainError("sampling region has too few points with |W|_h < 1")
        for x in space.sample(rng, count, radius):
            if m.nav.admissible(x, 0.02):
                pts.append(x)
    return np.array(pts[:count])


def run_metric_suite(sc: Scenario, m: RandersMetric | None = None, oracle_points: int = 12,
                     flags: int = 6) -> SuiteResult:
    m = m or sc.metric()
    res = SuiteResult("metric identities")
    rng = np.random.default_rng(np.random.SeedSequence(sc.seed).spawn(2)[1])
    radius = sc.radius or sc.space.default_radius()
    X = _admissible_points(m, rng, sc.metric_samples, radius)
    Y = rng.normal(size=X.shape)
    nb = m.evaluate_batch(X, Y)
    n = sc.space.dim
    res.check("navigation form vs alpha + beta (relative)", float(np.max(np.abs(nb.F_nav - nb.F_ab) / nb.F_nav)), 1e-12)
    res.check("det(a) lambda^(n+1) / det(h) - 1", float(np.max(np.abs(nb.det_a * nb.lam ** (n + 1) / nb.det_h - 1))), 1e-10)
    res.check("Busemann-Hausdorff density vs sqrt det h", float(np.max(np.abs(nb.sigma_bh - np.sqrt(nb.det_h)))), 1e-10)

    g_err = N_err = leg_err = s_err = k_err = 0.0
    fc = classify_field(sc.space, sc.wind, radius=radius, tol=sc.tol)
    res.note(f"wind class: {fc.kind} (k0 = {fc.k0:.6g}, residual {fc.residual:.2e})")
    from .core import jacobian

    for x, y in zip(X[:oracle_points], Y[:oracle_points]):
        g = m.fundamental_tensor(x, y)
        g_err = max(g_err, float(np.max(np.abs(g - m.fundamental_tensor_autodiff(x, y)))))
        _, dG = jacobian(lambda z: m.spray_generic(x, z), y)
        N_err = max(N_err, float(np.max(np.abs(m.nonlinear_connection(x, y) - np.asarray(dG, dtype=float)))))
        back = m.legendre_inv(x, m.legendre(x, y))
        leg_err = max(leg_err, float(np.max(np.abs(back - y)) / np.max(np.abs(y))))
        if fc.isotropic:
            s_err = max(s_err, abs(m.s_curvature(x, y) - (n + 1) * fc.k0 * m.F(x, y)))
    res.check("fundamental tensor closed form vs autodiff Hessian", g_err, 1e-9)
    res.check("nonlinear connection vs y-derivative of the spray", N_err, 1e-8)
    res.check("Legendre round trip (relative)", leg_err, 1e-10)
    if fc.isotropic:
        res.check("S-curvature vs (n+1) k0 F", s_err, 1e-6)
        expected = sc.space.curvature - fc.k0**2
        Ks = []
        for x, y in zip(X[:flags], Y[:flags]):
            v = rng.normal(size=n)
            Ks.append(m.flag_curvature(x, y, v))
        Ks = np.array(Ks)
        res.note(f"flag curvature mean {Ks.mean():.10g}, expected c - k0^2 = {expected:.10g}")
        res.check("flag curvature spread", float(Ks.max() - Ks.min()), 1e-3)
        res.check("flag curvature mean vs c - k0^2", abs(float(Ks.mean()) - expected), 1e-4)
    return res


def run_shift_suite(sc: Scenario, m: RandersMetric | None = None, points: int | None = None) -> SuiteResult:
    m = m or sc.metric()
    hyp = sc.hypersurface
    radius = sc.radius or sc.space.default_radius()
    fc = classify_field(sc.space, sc.wind, radius=radius, tol=sc.tol)
    if not fc.isotropic:
        raise UnsupportedHypothesis(
            f"principal curvature shift needs a Killing or homothetic wind; classification residual {fc.residual:.3e}"
        )
    M = catalog(hyp["entry"], sc.space, **hyp.get("params", {}))
    res = SuiteResult(f"principal curvature shift on {hyp['entry']}")
    orientation = int(hyp.get("orientation", 1))
    rng = np.random.default_rng(np.random.SeedSequence(sc.seed).spawn(3)[2])
    want = points or int(hyp.get("samples", 8))
    shift = angle = normal_der = factor = 0.0
    used = 0
    for u in M.sample(rng, 20 * want):
        if used == want:
            break
        if not m.nav.admissible(np.asarray(M(u), dtype=float), 0.02):
            continue
        rep = verify_shift(M, m, u, orientation, fc)
        im = induced_metric(M, m, u)
        shift = max(shift, rep.shift_residual)
        angle = max(angle, rep.principal_angle)
        normal_der = max(normal_der, rep.normal_derivative_residual)
        factor = max(factor, im.residual)
        used += 1
        if used == 1:
            res.note(
                f"k0 = {rep.k0:.6g}; first point: Riemannian {np.round(rep.principal_h, 10).tolist()}, "
                f"Randers {np.round(rep.principal_F, 10).tolist()}, conformal factor {im.factor:.10g}"
            )
    if used == 0:
        raise DomainError("no catalog sample lies where |W|_h < 1")
    res.note(f"{used} parameter points")
    res.check("principal curvature shift residual max|lambda - lambda_h - k0|", shift, 1e-6)
    res.check("principal direction subspace angle", angle, 1e-4)
    res.check("normal derivative relation residual", normal_der, 1e-6)
    res.check("induced metric conformal factor residual", factor, 1e-8)
    return res


def build_setting(sc: Scenario) -> Setting:
    func = sc.function
    n = sc.space.dim
    try:
        if "builtin" in func:
            f = builtin_field(func["builtin"], n)
        elif "expression" in func:
            f = parsed_field(str(func["expression"]), n)
        else:
            f = homogeneous_field(str(func["homogeneous"]), int(func["degree"]), n + 1)
    except (ExprError, ValueError) as exc:
        raise ConfigError(f"function: {exc}") from None
    Q = None
    if f.domain == "sphere":
        Q = sc.Q_ambient if sc.Q_ambient is not None else np.zeros((n + 1, n + 1))
    radius = sc.radius
    if radius is None and f.domain == "sphere":
        radius = 3.0 if sc.space.chart == "stereographic" else 2.0
    return Setting(f, sc.metric(), radius, Q=Q)


def run_isoparametric_suite(sc: Scenario, setting: Setting | None = None):
    setting = setting or build_setting(sc)
    sv = survey(setting, sc.level_values, sc.count, sc.seed, sc.levels)
    a = assess(sv)
    res = SuiteResult(f"isoparametric criteria for {setting.field.label}")
    for r in a.reports.values():
        res.note(r.summary())
        for note in r.notes:
            res.note(f"  {note}")
    res.require("Finsler-side criteria agree", a.agree)
    want = sc.expect.get("verdict")
    if want is not None:
        res.require(f"expected verdict {want}", a.reports["direct"].verdict == want)
    tr = a.transfer
    if tr is None:
        res.note(f"transfer check skipped: {a.transfer_skipped}")
    else:
        res.note(f"df(W) constant on levels: {tr.passes}; phi means {(np.round(tr.phi.means, 10) + 0.0).tolist()}")
        if tr.passes:
            res.check("transfer a~ = a + phi at level means", tr.a_tilde_residual, 1e-6)
            res.check("transfer b~ = a~ (b/a - 2 n k0 + phi')", tr.b_tilde_residual, sc.tol.profile_identity)
            res.note(f"short form b - a (2 n k0 - phi') residual {tr.b_tilde_residual_short:.3e}")
        if "phi" in sc.expect:
            res.check("fitted phi vs expected", float(np.max(np.abs(tr.phi.means - float(sc.expect["phi"])))), 1e-6)
    return res, sv, a


def write_csv(path, sv: Survey):
    """One row per sampled point, fixed column order, 17 significant digits."""
    n = sv.setting.space.dim
    header = ["level"] + [f"x{i + 1}" for i in range(n)] + ["F_grad", "lap_F", "df_h", "lap_h", "df_W"]
    fmt = lambda v: format(float(v), ".17g")  # noqa: E731
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for s in sv.samples:
            for i, x in enumerate(s.points):
                row = [s.level, *x] + [s[c][i] for c in ("F_grad", "lap_F", "df_h", "lap_h", "df_W")]
                w.writerow([fmt(v) for v in row])
    return path


def scenario_dir() -> Path:
    return Path(__file__).parent / "scenarios"


def shipped_scenarios() -> dict:
    return {p.stem: p for p in sorted(scenario_dir().glob("*.json"))}

