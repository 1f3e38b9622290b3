"""Isoparametric functions: level sampling, per-level constancy tests and the
criteria that compare the Finsler, Riemannian and navigation descriptions.

A *survey* samples every requested level once and records all per-point
quantities; each criterion then reads the columns it needs:

* direct:       F(grad f) and the Finsler Laplacian
* riemannian:   |df|_h and the Laplace-Beltrami operator
* navigation:   |df|_h + df(W) and
                (1/|df|_h) lap_h f + div W + <d(df(W)), df>_h / |df|_h^2
* sphere:       the ambient homogeneous-function form of the navigation test

A pair of expressions is *isoparametric* when both are constant on every
level, *transnormal* when only the first one is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import DEFAULT, Tolerances
from .core import DomainError, eval_jet2, gradient, jacobian, solve_sym_geig
from .core.linalg import group_eigenvalues
from .expr import Expression
from .hypersurfaces import UnsupportedHypothesis
from .randers import ConsistencyError, NavigationSpec, RandersMetric
from .riemannian import (
    FieldClass,
    SpaceForm,
    VectorFieldSpec,
    chart_to_sphere,
    classify_field,
    covariant_data,
    riem_grad_hess_lap,
    sphere_rotation_field,
    sphere_to_chart,
)

ISOPARAMETRIC = "isoparametric"
TRANSNORMAL = "transnormal"
NEITHER = "neither"


class SamplingError(RuntimeError):
    """Newton projection could not produce enough points on a level."""


class CriticalLevelError(SamplingError):
    """Too many sampled points on a level are critical points of f."""


class HomogeneityError(ValueError):
    pass


# scalar fields ---------------------------------------------------------------------

BUILTINS = {
    "x1": lambda n: "x1",
    "height": lambda n: f"x{n}",
    "norm2": lambda n: f"abs2(block(1,{n}))",
    "norm": lambda n: f"sqrt(abs2(block(1,{n})))",
    "parabola": lambda n: "x1^2 - x2",
}


@dataclass(frozen=True)
class ScalarField:
    """A function of chart coordinates, or a homogeneous function on R^{n+1}
    restricted to the unit sphere (``domain == "sphere"``)."""

    expr: Expression
    dim: int  # number of arguments: chart dimension or n + 1
    kind: str = "parsed"
    domain: str = "chart"
    degree: int | None = None
    label: str = ""

    def __call__(self, x):
        return self.expr(x)

    @property
    def text(self) -> str:
        return self.expr.text


def parsed_field(text: str, dim: int, label: str = "") -> ScalarField:
    e = Expression.parse(text)
    if e.min_dim > dim:
        raise ValueError(f"expression uses x{e.min_dim} but the chart has dimension {dim}")
    return ScalarField(e, dim, "parsed", "chart", None, label or text)


def builtin_field(name: str, dim: int) -> ScalarField:
    if name not in BUILTINS:
        raise ValueError(f"unknown builtin field {name!r}; expected one of {sorted(BUILTINS)}")
    f = parsed_field(BUILTINS[name](dim), dim, name)
    return ScalarField(f.expr, dim, "builtin", "chart", None, name)


def homogeneous_field(
    text: str, degree: int, ambient_dim: int, seed: int = 0, samples: int = 16
) -> ScalarField:
    """Phi on R^{n+1}, restricted to S^n.  Homogeneity is verified at random (x, t)."""
    e = Expression.parse(text)
    if e.min_dim > ambient_dim:
        raise ValueError(f"expression uses x{e.min_dim} but the ambient space is R^{ambient_dim}")
    if ambient_dim < 3:
        raise ValueError("sphere fields need S^n with n >= 2")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x = rng.normal(size=ambient_dim)
        t = rng.uniform(0.5, 2.0)
        lhs, rhs = float(e(t * x)), t**degree * float(e(x))
        if abs(lhs - rhs) > 1e-9 * max(1.0, abs(rhs)):
            raise HomogeneityError(
                f"{text!r} is not homogeneous of degree {degree}: Phi(tx) = {lhs!r}, t^k Phi(x) = {rhs!r}"
            )
    return ScalarField(e, ambient_dim, "homogeneous", "sphere", int(degree), text)


# sphere calculus -------------------------------------------------------------------

@dataclass(frozen=True)
class SphereCalculus:
    grad: np.ndarray  # ambient components of the sphere gradient
    grad_norm2: float
    laplacian: float


def sphere_calculus(Phi, k: int, x) -> SphereCalculus:
    """Sphere gradient, its squared norm and the Laplacian of a k-homogeneous
    Phi at a point of the unit sphere, from ambient derivatives."""
    x = np.asarray(x, dtype=float)
    if abs(float(x @ x) - 1.0) > 1e-10:
        raise DomainError(f"|x| = {math.sqrt(float(x @ x))!r} is not on the unit sphere")
    n = len(x) - 1
    jet = eval_jet2(Phi, x)
    P = float(jet.value)
    g = np.asarray(jet.grad, dtype=float)
    lapE = float(np.trace(jet.hess))
    return SphereCalculus(g - k * P * x, float(g @ g) - k * k * P * P, lapE - k * (k + n - 1) * P)


def sphere_calculus_projected(Phi, x) -> SphereCalculus:
    """Oracle by tangential projection; needs no homogeneity."""
    x = np.asarray(x, dtype=float)
    n = len(x) - 1
    jet = eval_jet2(Phi, x)
    g = np.asarray(jet.grad, dtype=float)
    H = np.asarray(jet.hess, dtype=float)
    P = np.eye(len(x)) - np.outer(x, x)
    gt = P @ g
    return SphereCalculus(gt, float(gt @ gt), float(np.trace(P @ H @ P)) - n * float(g @ x))


def sphere_calculus_chart(Phi, x, chart: str = "stereographic") -> SphereCalculus:
    """Oracle through a chart of the unit sphere (valid away from the chart's pole)."""
    x = np.asarray(x, dtype=float)
    space = SpaceForm(len(x) - 1, 1.0, chart)
    u = np.asarray(sphere_to_chart(space, x), dtype=float)
    fc = lambda z: Phi(chart_to_sphere(space, z))  # noqa: E731
    grad, _, lap = riem_grad_hess_lap(space, fc, u)
    h = np.asarray(space.metric(u), dtype=float)
    _, J = jacobian(lambda z: chart_to_sphere(space, z), u)
    return SphereCalculus(np.asarray(J, dtype=float) @ grad, float(grad @ h @ grad), lap)


# profiles --------------------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    levels: np.ndarray
    means: np.ndarray
    spreads: np.ndarray
    constant: np.ndarray  # per level: spread below tolerance
    coeffs: np.ndarray  # polynomial fit, highest degree first
    max_deviation: float  # fit vs means
    derivative: np.ndarray  # finite differences of means across levels

    @property
    def all_constant(self) -> bool:
        return bool(np.all(self.constant))

    def __call__(self, t):
        return np.polyval(self.coeffs, t)


def fit_profiles(levels, values, degree: int | None = None, tol: Tolerances = DEFAULT) -> Profile:
    """Per-level means and spreads, a low-degree fit, and a derivative estimate."""
    levels = np.asarray(levels, dtype=float)
    if len(levels) < 2:
        raise ValueError("profiles need at least two levels")
    if len(values) != len(levels):
        raise ValueError("one value array per level")
    vals = [np.asarray(v, dtype=float) for v in values]
    if any(v.size == 0 for v in vals):
        raise ValueError("empty level")
    means = np.array([v.mean() for v in vals])
    spreads = np.array([v.max() - v.min() for v in vals])
    constant = np.asarray(tol.constant(spreads, means))
    deg = min(3, len(levels) - 1) if degree is None else degree
    coeffs = np.polyfit(levels, means, deg)
    dev = float(np.max(np.abs(np.polyval(coeffs, levels) - means)))
    deriv = np.gradient(means, levels, edge_order=2 if len(levels) > 2 else 1)
    return Profile(levels, means, spreads, constant, coeffs, dev, deriv)


def _verdict(first: Profile, second: Profile) -> str:
    if first.all_constant and second.all_constant:
        return ISOPARAMETRIC
    if first.all_constant:
        return TRANSNORMAL
    return NEITHER


# settings and sampling -----------------------------------------------------------

@dataclass
class Setting:
    """Where a field is tested: a scalar field, a Randers metric on a chart and
    the sampling region (a ball of ``radius`` around the chart origin)."""

    field: ScalarField
    metric: RandersMetric
    radius: float | None = None
    margin: float = 0.02
    Q: np.ndarray | None = None  # ambient rotation generator for sphere fields
    _fclass: FieldClass | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        space = self.space
        if self.field.domain == "sphere":
            if space.curvature != 1.0 or space.chart not in ("stereographic", "beltrami"):
                raise ValueError("sphere fields need the unit sphere in a stereographic or beltrami chart")
            if self.field.dim != space.dim + 1:
                raise ValueError("sphere field dimension must be chart dimension + 1")
        elif self.field.dim != space.dim:
            raise ValueError("field and chart dimensions differ")
        if self.radius is None:
            self.radius = space.default_radius()

    @property
    def space(self) -> SpaceForm:
        return self.metric.nav.space

    @property
    def tol(self) -> Tolerances:
        return self.metric.tol

    def f_chart(self, x):
        if self.field.domain == "sphere":
            return self.field(chart_to_sphere(self.space, x))
        return self.field(x)

    def field_class(self) -> FieldClass:
        if self._fclass is None:
            self._fclass = classify_field(
                self.space, self.metric.nav.W, radius=self.radius, tol=self.tol
            )
        return self._fclass

    def accepts(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)) or float(np.sqrt(x @ x)) > self.radius:
            return False
        return self.metric.nav.admissible(x, self.margin)


def sphere_setting(
    field_: ScalarField, Q, chart: str = "stereographic", radius: float | None = None, tol: Tolerances = DEFAULT
) -> Setting:
    n = field_.dim - 1
    space = SpaceForm(n, 1.0, chart)
    Q = np.asarray(Q, dtype=float)
    W = sphere_rotation_field(space, Q)
    if radius is None:
        radius = 3.0 if chart == "stereographic" else 2.0
    return Setting(field_, RandersMetric(NavigationSpec(space, W), tol), radius, Q=Q)


@dataclass(frozen=True)
class LevelPoints:
    level: float
    points: np.ndarray  # chart coordinates
    ambient: np.ndarray | None  # sphere points, for sphere fields
    excluded: int
    attempts: int


def _newton_chart(setting: Setting, x, t, max_iter=60):
    h_of = setting.space.metric
    tol = setting.tol
    for _ in range(max_iter):
        val, df = jacobian(setting.f_chart, x)
        val, df = float(val), np.asarray(df, dtype=float)
        r = val - t
        if abs(r) < tol.newton * max(1.0, abs(t)):
            return x, df
        hinv_df = np.linalg.solve(np.asarray(h_of(x), dtype=float), df)
        d2 = float(df @ hinv_df)
        if d2 < tol.critical**2:
            return None
        x = x - r * hinv_df / d2
        if not setting.space.in_domain(x) or not np.all(np.isfinite(x)):
            return None
    val = float(setting.f_chart(x))
    if abs(val - t) < 1e-9:
        return x, np.asarray(jacobian(setting.f_chart, x)[1], dtype=float)
    return None


def _newton_sphere(field_: ScalarField, X, t, tol: Tolerances, max_iter=60):
    k = field_.degree
    for _ in range(max_iter):
        val, g = jacobian(field_, X)
        val, g = float(val), np.asarray(g, dtype=float)
        r = val - t
        if abs(r) < tol.newton * max(1.0, abs(t)):
            return X
        gt = g - k * val * X
        d2 = float(gt @ gt)
        if d2 < tol.critical**2:
            return None
        X = X - r * gt / d2
        X = X / np.linalg.norm(X)
    return X if abs(float(field_(X)) - t) < 1e-9 else None


def _seed_points(setting: Setting, rng, count):
    if setting.field.domain == "sphere":
        X = rng.normal(size=(count, setting.field.dim))
        return X / np.linalg.norm(X, axis=1, keepdims=True)
    return setting.space.sample(rng, count, setting.radius)


def sample_level_set(setting: Setting, t: float, count: int, seed=0) -> LevelPoints:
    """Seeded points on f^{-1}(t) inside the sampling region."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    tol = setting.tol
    sphere = setting.field.domain == "sphere"
    pts, amb = [], []
    excluded = attempts = 0
    max_attempts = 60 * count
    while len(pts) < count:
        if attempts >= max_attempts:
            raise SamplingError(
                f"level {t!r}: only {len(pts)} of {count} points after {attempts} Newton projections"
            )
        batch = _seed_points(setting, rng, min(count, max_attempts - attempts))
        for p in batch:
            attempts += 1
            if sphere:
                X = _newton_sphere(setting.field, p, float(t), tol)
                if X is None:
                    continue
                x = np.asarray(sphere_to_chart(setting.space, X), dtype=float)
                if not setting.accepts(x):
                    continue
                if abs(float(setting.f_chart(x)) - t) >= 1e-9:
                    continue
                df = np.asarray(jacobian(setting.f_chart, x)[1], dtype=float)
            else:
                res = _newton_chart(setting, np.array(p, dtype=float), float(t))
                if res is None:
                    continue
                x, df = res
                X = None
                if not setting.accepts(x):
                    continue
            hinv = np.linalg.inv(np.asarray(setting.space.metric(x), dtype=float))
            if math.sqrt(float(df @ hinv @ df)) < tol.critical:
                excluded += 1
                continue
            pts.append(x)
            amb.append(X)
            if len(pts) == count:
                break
    if excluded > tol.max_exclusion * (excluded + count):
        raise CriticalLevelError(f"level {t!r}: {excluded} critical points among {excluded + count}")
    return LevelPoints(float(t), np.array(pts), np.array(amb) if sphere else None, excluded, attempts)


# per-point quantities ------------------------------------------------------------

COLUMNS = ("F_grad", "lap_F", "df_h", "lap_h", "df_W", "nav_first", "nav_second", "div_W", "distinct")


@dataclass(frozen=True)
class LevelSample:
    level: float
    points: np.ndarray
    ambient: np.ndarray | None
    excluded: int
    values: dict  # column name -> per-point array

    def __getitem__(self, key) -> np.ndarray:
        return self.values[key]


def _level_set_principal_count(hess, df, h, tol) -> int:
    B = scipy.linalg.null_space(df[None, :])
    if B.shape[1] == 0:
        return 0
    dfh = math.sqrt(float(df @ np.linalg.solve(h, df)))
    eig = solve_sym_geig(B.T @ hess @ B / dfh, B.T @ h @ B)
    return len(group_eigenvalues(eig.values, 1e-6))


def point_values(setting: Setting, x) -> dict:
    m = setting.metric
    space = setting.space
    f = setting.f_chart
    W = m.nav.W
    x = np.asarray(x, dtype=float)
    _, df = jacobian(f, x)
    df = np.asarray(df, dtype=float)
    h = np.asarray(space.metric(x), dtype=float)
    hinv = np.linalg.inv(h)
    dfh = math.sqrt(float(df @ hinv @ df))
    _, hess_h, lap_h = riem_grad_hess_lap(space, f, x)

    grad_F = m.gradient(f, x)
    F_grad = m.F(x, grad_F)
    F_dual = m.dual(x, df)
    if abs(F_grad - F_dual) > 1e-10 * max(1.0, F_dual):
        raise ConsistencyError(f"F(grad f) = {F_grad!r} but F*(df) = {F_dual!r}")
    lap_F = m.laplacian(f, x, cross_check=True)

    def dfW(z):
        return jacobian(f, z)[1] @ W(z)

    psi, dpsi = jacobian(dfW, x)
    psi, dpsi = float(psi), np.asarray(dpsi, dtype=float)
    cd = covariant_data(space, W, x)
    div_W = float(np.einsum("ij,ij->", np.asarray(cd.h_inv, dtype=float), np.asarray(cd.w_cov, dtype=float)))
    nav_first = dfh + psi
    nav_second = lap_h / dfh + div_W + float(dpsi @ hinv @ df) / dfh**2
    return {
        "F_grad": F_grad,
        "lap_F": lap_F,
        "df_h": dfh,
        "lap_h": lap_h,
        "df_W": psi,
        "nav_first": nav_first,
        "nav_second": nav_second,
        "div_W": div_W,
        "distinct": _level_set_principal_count(hess_h, df, h, setting.tol),
    }


def measure_level(setting: Setting, lp: LevelPoints) -> LevelSample:
    rows = [point_values(setting, x) for x in lp.points]
    values = {c: np.array([r[c] for r in rows], dtype=float) for c in COLUMNS}
    return LevelSample(lp.level, lp.points, lp.ambient, lp.excluded, values)


@dataclass(frozen=True)
class Survey:
    setting: Setting
    samples: tuple
    seed: int

    @property
    def levels(self) -> np.ndarray:
        return np.array([s.level for s in self.samples])

    def column(self, name: str) -> list:
        return [s[name] for s in self.samples]


def observed_range(setting: Setting, seed: int = 0, count: int = 512) -> tuple:
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    vals = []
    for p in _seed_points(setting, rng, count):
        if setting.field.domain == "sphere":
            x = np.asarray(sphere_to_chart(setting.space, p), dtype=float)
        else:
            x = p
        if setting.accepts(x):
            vals.append(float(setting.f_chart(x)))
    if len(vals) < 2:
        raise SamplingError("sampling region contains no admissible points")
    return min(vals), max(vals)


def default_levels(setting: Setting, count: int = 7, seed: int = 0) -> np.ndarray:
    lo, hi = observed_range(setting, seed)
    return np.linspace(lo, hi, count + 2)[1:-1]


def survey(setting: Setting, levels=None, count: int = 12, seed: int = 0, n_levels: int = 7) -> Survey:
    """Sample and measure every level once.  Each level gets its own child
    seed, so the result does not depend on evaluation order."""
    if levels is None:
        levels = default_levels(setting, n_levels, seed)
    levels = [float(t) for t in levels]
    children = np.random.SeedSequence(seed).spawn(len(levels) + 1)[1:]
    samples = []
    for t, ss in zip(levels, children):
        lp = sample_level_set(setting, t, count, np.random.default_rng(ss))
        samples.append(measure_level(setting, lp))
    return Survey(setting, tuple(samples), seed)


# criteria ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsoparametricReport:
    criterion: str
    levels: np.ndarray
    first: Profile
    second: Profile
    verdict: str
    distinct: int | None = None  # number of distinct principal curvatures of the levels
    notes: tuple = ()

    def summary(self) -> str:
        return (
            f"{self.criterion}: {self.verdict} (max spread {float(np.max(self.first.spreads)):.3e}"
            f" / {float(np.max(self.second.spreads)):.3e})"
        )


def _report(name, sv: Survey, first_col, second_col, notes=()) -> IsoparametricReport:
    tol = sv.setting.tol
    first = fit_profiles(sv.levels, sv.column(first_col), tol=tol)
    second = fit_profiles(sv.levels, sv.column(second_col), tol=tol)
    distinct = int(max(int(np.max(s["distinct"])) for s in sv.samples))
    return IsoparametricReport(name, sv.levels, first, second, _verdict(first, second), distinct, tuple(notes))


def check_direct(sv: Survey) -> IsoparametricReport:
    return _report("direct", sv, "F_grad", "lap_F")


def check_riemannian(sv: Survey) -> IsoparametricReport:
    return _report("riemannian", sv, "df_h", "lap_h")


def check_navigation(sv: Survey) -> IsoparametricReport:
    notes = []
    fc = sv.setting.field_class()
    if fc.isotropic:
        expected = -2.0 * sv.setting.space.dim * fc.k0 + 0.0
        err = max(float(np.max(np.abs(s["div_W"] - expected))) for s in sv.samples)
        if err > 1e-8:
            raise ConsistencyError(f"div W differs from -2 n k0 = {expected!r} by {err:.3e}")
        notes.append(f"div W = -2 n k0 = {expected:.6g} (residual {err:.2e})")
    return _report("navigation", sv, "nav_first", "nav_second", notes)


@dataclass(frozen=True)
class TransferReport:
    """Transfer of an h-isoparametric function to the Randers metric."""

    passes: bool  # df(W) is constant on every level
    phi: Profile
    k0: float
    a_tilde_residual: float  # |a~ - (a + phi)| at level means
    b_tilde_residual: float  # |b~ - (a + phi)(b/a - 2 n k0 + phi')|
    b_tilde_residual_short: float  # |b~ - (b - a (2 n k0 - phi'))|, exact only when phi = 0
    direct_verdict: str

    @property
    def agrees(self) -> bool:
        return self.passes == (self.direct_verdict == ISOPARAMETRIC)


def check_transfer(sv: Survey, riemannian: IsoparametricReport | None = None,
                   direct: IsoparametricReport | None = None) -> TransferReport:
    """df(W) = phi(f) test for an h-isoparametric f and homothetic W.

    When it passes, the Randers profiles are a~ = a + phi and
    b~ = a~ (b/a - 2 n k0 + phi').  The shorter b - a (2 n k0 - phi') agrees
    with this only where phi vanishes; both residuals are reported.
    """
    riemannian = riemannian or check_riemannian(sv)
    if riemannian.verdict != ISOPARAMETRIC:
        raise UnsupportedHypothesis(f"f is not isoparametric for h (verdict {riemannian.verdict})")
    fc = sv.setting.field_class()
    if not fc.isotropic:
        raise UnsupportedHypothesis(f"wind is not homothetic (residual {fc.residual:.3e})")
    direct = direct or check_direct(sv)
    tol = sv.setting.tol
    phi = fit_profiles(sv.levels, sv.column("df_W"), tol=tol)
    n = sv.setting.space.dim
    a, b = riemannian.first.means, riemannian.second.means
    at, bt = direct.first.means, direct.second.means
    ra = float(np.max(np.abs(at - (a + phi.means))))
    slope = 2 * n * fc.k0 - phi.derivative
    rb = float(np.max(np.abs(bt - (a + phi.means) * (b / a - slope))))
    rb_short = float(np.max(np.abs(bt - (b - a * slope))))
    return TransferReport(phi.all_constant, phi, fc.k0, ra, rb, rb_short, direct.verdict)


def sphere_criterion_values(field_: ScalarField, Q, X, exact: bool = False) -> tuple:
    """The two ambient expressions for a k-homogeneous Phi and W = XQ at X on S^n.

    With ``exact`` the second expression carries the term
    -k^2 Phi <grad Phi, XQ> / |grad_h Phi|^2 obtained by rewriting the
    navigation criterion through the sphere calculus identities.
    """
    k = field_.degree
    X = np.asarray(X, dtype=float)
    Q = np.asarray(Q, dtype=float)
    n = len(X) - 1
    jet = eval_jet2(field_, X)
    P = float(jet.value)
    g = np.asarray(jet.grad, dtype=float)
    lapE = float(np.trace(jet.hess))
    wind = X @ Q
    psi = float(g @ wind)
    dpsi = np.asarray(gradient(lambda Z: gradient(field_, Z) @ (Z @ Q), X), dtype=float)
    gh = math.sqrt(float(np.sum((g - k * P * X) ** 2)))
    first = gh + psi
    num = float(dpsi @ g)
    if exact:
        num -= k * k * P * psi
    second = (lapE - k * (k + n - 1) * P) / gh + num / (float(g @ g) - k * k * P * P)
    return first, second


def check_sphere_criterion(
    field_: ScalarField,
    Q,
    levels=None,
    count: int = 12,
    seed: int = 0,
    exact: bool = False,
    tol: Tolerances = DEFAULT,
    ambient_levels=None,
) -> IsoparametricReport:
    """Per-level constancy of the two ambient expressions on S^n.

    ``ambient_levels`` (a sequence of (t, points)) reuses existing samples.
    """
    if field_.domain != "sphere":
        raise ValueError("the sphere criterion needs a homogeneous sphere field")
    Q = np.asarray(Q, dtype=float)
    if ambient_levels is None:
        if levels is None:
            raise ValueError("give levels or ambient_levels")
        children = np.random.SeedSequence(seed).spawn(len(levels) + 1)[1:]
        ambient_levels = []
        for t, ss in zip(levels, children):
            rng = np.random.default_rng(ss)
            pts = []
            attempts = 0
            while len(pts) < count:
                attempts += 1
                if attempts > 60 * count:
                    raise SamplingError(f"level {t!r}: Newton projection on the sphere failed")
                X0 = rng.normal(size=field_.dim)
                X = _newton_sphere(field_, X0 / np.linalg.norm(X0), float(t), tol)
                if X is not None and float(np.linalg.norm(X @ Q)) < 1.0:
                    pts.append(X)
            ambient_levels.append((float(t), np.array(pts)))
    ts = np.array([t for t, _ in ambient_levels])
    firsts, seconds = [], []
    for _, pts in ambient_levels:
        vals = [sphere_criterion_values(field_, Q, X, exact) for X in pts]
        firsts.append(np.array([v[0] for v in vals]))
        seconds.append(np.array([v[1] for v in vals]))
    first = fit_profiles(ts, firsts, tol=tol)
    second = fit_profiles(ts, seconds, tol=tol)
    name = "sphere (exact)" if exact else "sphere"
    return IsoparametricReport(name, ts, first, second, _verdict(first, second))


def ambient_levels(sv: Survey) -> list:
    if sv.setting.field.domain != "sphere":
        raise ValueError("survey is not on a sphere field")
    return [(s.level, s.ambient) for s in sv.samples]


@dataclass(frozen=True)
class Assessment:
    reports: dict  # criterion -> IsoparametricReport
    transfer: TransferReport | None
    transfer_skipped: str | None

    @property
    def verdicts(self) -> dict:
        return {k: r.verdict for k, r in self.reports.items()}

    @property
    def agree(self) -> bool:
        """Finsler-side criteria must coincide; the Riemannian one may differ."""
        v = [r.verdict for k, r in self.reports.items() if k != "riemannian"]
        ok = len(set(v)) <= 1
        if self.transfer is not None:
            ok = ok and self.transfer.agrees
        return ok


def assess(sv: Survey, sphere_exact: bool = False) -> Assessment:
    reports = {
        "direct": check_direct(sv),
        "riemannian": check_riemannian(sv),
        "navigation": check_navigation(sv),
    }
    setting = sv.setting
    if setting.field.domain == "sphere" and setting.Q is not None:
        reports["sphere"] = check_sphere_criterion(
            setting.field, setting.Q, tol=setting.tol, ambient_levels=ambient_levels(sv), exact=sphere_exact
        )
    transfer, skipped = None, None
    try:
        transfer = check_transfer(sv, reports["riemannian"], reports["direct"])
    except UnsupportedHypothesis as exc:
        skipped = str(exc)
    return Assessment(reports, transfer, skipped)
