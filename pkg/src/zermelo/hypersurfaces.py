"""Hypersurfaces in a Randers space: unit normals, induced metrics, shape
operators and principal curvatures, compared against the Riemannian ones.

Sign convention: the shape operator is A_n(X) = -(D^n_X n)^T, the tangential
part taken in g_n.  With it an outward-oriented round sphere of radius r in
Euclidean space has principal curvatures -1/r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .config import DEFAULT, Tolerances
from .core import DomainError, cos, det, inv, is_dual, jacobian, primal_array, sin, solve_sym_geig, sqrt
from .core.linalg import group_eigenvalues
from .randers import ConsistencyError, NavigationSpec, RandersMetric
from .riemannian import FieldClass, SpaceForm, VectorFieldSpec, classify_field, sphere_to_chart


class UnsupportedHypothesis(ValueError):
    """A required hypothesis (isotropic wind, isoparametric f) does not hold."""


def _f(a):
    return np.asarray(a, dtype=float)


@dataclass(frozen=True)
class Immersion:
    """Parametric hypersurface u -> x in a chart of dimension ``dim``."""

    dim: int
    phi: Callable
    catalog_id: str | None = None
    params: dict = field(default_factory=dict, compare=False)
    # u -> float vector on the preferred side; fixes the '+' orientation
    orient: Callable | None = field(default=None, compare=False)
    # (rng, count) -> parameter samples inside the valid patch
    sampler: Callable | None = field(default=None, compare=False)

    @property
    def param_dim(self) -> int:
        return self.dim - 1

    def __call__(self, u):
        return self.phi(u)

    def differential(self, u) -> np.ndarray:
        _, J = jacobian(self.phi, u)
        J = np.asarray(J)
        rank = np.linalg.matrix_rank(_f(primal_array(J)), tol=1e-10)
        if rank < self.param_dim:
            raise DomainError(f"immersion differential has rank {rank} < {self.param_dim}")
        return J

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if self.sampler is None:
            return rng.uniform(-0.5, 0.5, size=(count, self.param_dim))
        return self.sampler(rng, count)


def _conormal(dphi):
    """Covector annihilating the columns of dphi (generalized cross product)."""
    n = dphi.shape[0]
    obj = dphi.dtype == object
    nu = np.empty(n, dtype=object if obj else float)
    for i in range(n):
        M = np.empty((n, n), dtype=object if obj else float)
        M[:, 0] = 0.0
        M[i, 0] = 1.0
        M[:, 1:] = dphi
        nu[i] = det(M)
    return nu


def _orientation_sign(M: Immersion, u, nu_float, orientation: int) -> float:
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    s = 1.0
    if M.orient is not None:
        ref = _f(M.orient(_f(u)))
        if float(nu_float @ ref) < 0:
            s = -1.0
    return s * orientation


def _normals_generic(M: Immersion, nav: NavigationSpec, u, sign: float):
    """(h-unit normal, F-unit normal) as generic functions of u."""
    x = M.phi(u)
    _, dphi = jacobian(M.phi, u)
    nu = sign * _conormal(np.asarray(dphi))
    d = nav.data(x)
    raised = inv(d.h) @ nu
    n_bar = raised / sqrt(nu @ raised)
    return n_bar, n_bar + d.w_up


@dataclass(frozen=True)
class NormalPair:
    n_F: np.ndarray
    n_h: np.ndarray
    sign: float
    relation_residual: float  # |L^{-1}(conormal) - (n_h + W)|
    F_residual: float  # |F(n_F) - 1|
    h_residual: float  # |h(n_h, n_h) - 1|
    tangency_residual: float  # max_a |L(n_F)(dphi e_a)|


def unit_normals(M: Immersion, m: RandersMetric, u, orientation: int = 1) -> NormalPair:
    u = _f(u)
    x = _f(M(u))
    dphi = _f(M.differential(u))
    nu = _conormal(dphi)
    sign = _orientation_sign(M, u, nu, orientation)
    n_bar, n_F = (_f(v) for v in _normals_generic(M, m.nav, u, sign))
    nu_s = sign * nu
    # independent route: L^{-1} of the F*-normalized conormal
    n_leg = m.legendre_inv(x, nu_s) / m.dual(x, nu_s)
    h = _f(m.nav.space.metric(x))
    Ln = m.legendre(x, n_F)
    pair = NormalPair(
        n_F=n_F,
        n_h=n_bar,
        sign=sign,
        relation_residual=float(np.max(np.abs(n_leg - n_F))),
        F_residual=abs(m.F(x, n_F) - 1.0),
        h_residual=abs(float(n_bar @ h @ n_bar) - 1.0),
        tangency_residual=float(np.max(np.abs(Ln @ dphi))),
    )
    tol = m.tol
    if pair.F_residual > 1e-10 or pair.h_residual > 1e-10:
        raise ConsistencyError(f"normal normalization failed: {pair}")
    if pair.tangency_residual > 1e-9 * max(1.0, float(np.max(np.abs(Ln)))) or pair.relation_residual > tol.identity * 10:
        raise ConsistencyError(f"normal verification failed: {pair}")
    return pair


@dataclass(frozen=True)
class InducedMetric:
    g_hat: np.ndarray
    h_bar: np.ndarray
    factor: float  # 1 / (1 + <n_h, W>_h)
    residual: float  # max |g_hat - factor * h_bar|


def induced_metric(M: Immersion, m: RandersMetric, u, pair: NormalPair | None = None) -> InducedMetric:
    u = _f(u)
    if pair is None:
        pair = unit_normals(M, m, u)
    x = _f(M(u))
    dphi = _f(M.differential(u))
    h = _f(m.nav.space.metric(x))
    W = _f(m.nav.W(x))
    c = float(pair.n_h @ h @ W)
    if not 1.0 + c > 0:
        raise ConsistencyError("1 + <n_h, W>_h <= 0 despite |W|_h < 1")
    g_hat = dphi.T @ m.fundamental_tensor(x, pair.n_F) @ dphi
    h_bar = dphi.T @ h @ dphi
    factor = 1.0 / (1.0 + c)
    res = float(np.max(np.abs(g_hat - factor * h_bar)))
    if res > m.tol.identity * max(1.0, float(np.max(np.abs(h_bar)))):
        raise ConsistencyError(f"induced metric is not conformal (residual {res:.3e})")
    return InducedMetric(g_hat, h_bar, factor, res)


@dataclass(frozen=True)
class ShapeOperator:
    A: np.ndarray  # A[:, a] = A(d/du^a) in the coordinate basis
    second_form: np.ndarray  # g_hat(A X, Y)
    g_hat: np.ndarray
    derivative: np.ndarray  # columns D^n_{dphi e_a} n
    self_adjoint_residual: float
    normal: np.ndarray


def shape_operator(M: Immersion, m: RandersMetric, u, orientation: int = 1) -> ShapeOperator:
    u = _f(u)
    x = _f(M(u))
    dphi = _f(M.differential(u))
    sign = _orientation_sign(M, u, _conormal(dphi), orientation)
    n_F, dn = jacobian(lambda z: _normals_generic(M, m.nav, z, sign)[1], u)
    n_F, dn = _f(n_F), _f(dn)
    Gam = m.chern(x, n_F)
    # D^n along M only needs the tangential derivative of n
    V = dn + np.einsum("ijk,ja,k->ia", Gam, dphi, n_F)
    g_n = m.fundamental_tensor(x, n_F)
    g_hat = dphi.T @ g_n @ dphi
    S = -dphi.T @ g_n @ V  # S[c, a] = g_n(-D_a n, phi_c)
    resid = float(np.max(np.abs(S - S.T)))
    if resid > m.tol.identity * max(1.0, float(np.max(np.abs(S)))):
        raise ConsistencyError(f"shape operator is not self-adjoint (residual {resid:.3e})")
    A = np.linalg.solve(g_hat, S)
    return ShapeOperator(A, 0.5 * (S + S.T), g_hat, V, resid, n_F)


def riemannian_reference(m: RandersMetric) -> RandersMetric:
    """The same space with zero wind: F = |.|_h."""
    from .riemannian import affine_field

    return RandersMetric(NavigationSpec(m.nav.space, affine_field(m.dim)), m.tol)


@dataclass(frozen=True)
class CurvatureReport:
    principal_F: np.ndarray
    principal_h: np.ndarray
    mean_F: float
    multiplicities: tuple
    k0: float
    shift_residual: float
    principal_angle: float
    normal_derivative_residual: float
    self_adjoint_residual: float

    @property
    def distinct(self) -> int:
        return len(self.multiplicities)


def principal_curvatures(op: ShapeOperator, tol: Tolerances = DEFAULT):
    eig = solve_sym_geig(op.second_form, op.g_hat)
    if eig.residual > tol.eigen_residual * max(1.0, float(np.max(np.abs(op.second_form)))):
        raise ConsistencyError(f"eigen residual {eig.residual:.3e}")
    return eig


def verify_shift(
    M: Immersion,
    m: RandersMetric,
    u,
    orientation: int = 1,
    field_class: FieldClass | None = None,
) -> CurvatureReport:
    """Finsler and Riemannian principal data at one parameter point."""
    if field_class is None:
        field_class = classify_field(m.nav.space, m.nav.W, tol=m.tol)
    if not field_class.isotropic:
        raise UnsupportedHypothesis(
            f"wind is neither Killing nor homothetic (residual {field_class.residual:.3e})"
        )
    k0 = field_class.k0
    u = _f(u)
    ref = riemannian_reference(m)
    op = shape_operator(M, m, u, orientation)
    op_h = shape_operator(M, ref, u, orientation)
    eF = principal_curvatures(op, m.tol)
    eh = principal_curvatures(op_h, m.tol)
    groups = group_eigenvalues(eh.values, m.tol.eigen_group)
    angle = 0.0
    for g in groups:
        ang = scipy.linalg.subspace_angles(eF.vectors[:, g], eh.vectors[:, g])
        angle = max(angle, float(np.max(ang)))
    dphi = _f(M.differential(u))
    normal_der = float(np.max(np.abs(op.derivative - (op_h.derivative - k0 * dphi))))
    return CurvatureReport(
        principal_F=eF.values,
        principal_h=eh.values,
        mean_F=float(np.sum(eF.values)),
        multiplicities=tuple(len(g) for g in groups),
        k0=k0,
        shift_residual=float(np.max(np.abs(eF.values - eh.values - k0))),
        principal_angle=angle,
        normal_derivative_residual=normal_der,
        self_adjoint_residual=op.self_adjoint_residual,
    )


# catalog ----------------------------------------------------------------------------

def _sphere_point(v):
    """Unit vector in R^{m+1} from m hyperspherical angles (generic)."""
    m = len(v)
    out = []
    prod = 1.0
    for k in range(m):
        out.append(prod * cos(v[k]))
        prod = prod * sin(v[k])
    out.append(prod)
    return np.array(out, dtype=object if any(is_dual(t) for t in out) else float)


def _angle_sampler(m: int):
    def sample(rng, count):
        if m == 0:
            return np.zeros((count, 0))
        polar = rng.uniform(0.35, math.pi - 0.35, size=(count, m - 1))
        azim = rng.uniform(0.0, 2.0 * math.pi, size=(count, 1))
        return np.concatenate([polar, azim], axis=1)

    return sample


def _stack(parts):
    return np.concatenate([np.asarray(p, dtype=object) for p in parts]) if any(
        np.asarray(p).dtype == object for p in parts
    ) else np.concatenate([_f(p) for p in parts])


def hyperplane(dim: int, offset: float = 0.0, axis: int = 0) -> Immersion:
    def phi(u):
        return _stack([u[:axis], np.array([offset]) + 0.0 * u[0], u[axis:]])

    e = np.zeros(dim)
    e[axis] = 1.0
    return Immersion(
        dim,
        phi,
        "hyperplane",
        {"offset": offset, "axis": axis},
        orient=lambda u: e,
        sampler=lambda rng, count: rng.uniform(-0.6, 0.6, size=(count, dim - 1)),
    )


def hypersphere(dim: int, r: float, center=None) -> Immersion:
    if r <= 0:
        raise ValueError("radius must be positive")
    c = np.zeros(dim) if center is None else _f(center)

    def phi(u):
        return c + r * _sphere_point(u)

    return Immersion(
        dim,
        phi,
        "hypersphere",
        {"r": r},
        orient=lambda u: _f(phi(u)) - c,
        sampler=_angle_sampler(dim - 1),
    )


def cylinder(dim: int, m: int, r: float, axial: float = 0.6) -> Immersion:
    """S^m(r) x R^{dim-m-1}."""
    if not 1 <= m <= dim - 2:
        raise ValueError("cylinder needs 1 <= m <= dim - 2")
    if r <= 0:
        raise ValueError("radius must be positive")

    def phi(u):
        return _stack([r * _sphere_point(u[:m]), u[m:]])

    def orient(u):
        x = _f(phi(u))
        x[m + 1:] = 0.0
        return x

    def sample(rng, count):
        return np.concatenate(
            [_angle_sampler(m)(rng, count), rng.uniform(-axial, axial, size=(count, dim - m - 1))],
            axis=1,
        )

    return Immersion(dim, phi, "cylinder", {"m": m, "r": r}, orient=orient, sampler=sample)


def clifford_torus(space: SpaceForm, m: int, r: float) -> Immersion:
    """S^m(r) x S^{n-m-1}(s) in the sphere of curvature c, r^2 + s^2 = 1/c,
    carried into the chart."""
    n = space.dim
    c = space.curvature
    if c <= 0:
        raise ValueError("Clifford torus needs a positively curved space")
    if not 1 <= m <= n - 2:
        raise ValueError("Clifford torus needs 1 <= m <= n - 2")
    s2 = 1.0 / c - r * r
    if r <= 0 or s2 <= 0:
        raise ValueError("need r^2 + s^2 = 1/c with r, s > 0")
    s = math.sqrt(s2)

    def ambient(u):
        return _stack([r * _sphere_point(u[:m]), s * _sphere_point(u[m:])])

    def phi(u):
        return sphere_to_chart(space, ambient(u))

    def orient(u):
        X = _f(ambient(u))
        N = np.concatenate([(s / r) * X[: m + 1], -(r / s) * X[m + 1:]])
        _, J = jacobian(lambda Z: sphere_to_chart(space, Z), X)
        return _f(J) @ N

    base = _angle_sampler(m)
    fiber = _angle_sampler(n - m - 1)
    R = 1.0 / math.sqrt(c)

    def sample(rng, count):
        out = []
        while len(out) < count:
            u = np.concatenate([base(rng, 1)[0], fiber(rng, 1)[0]])
            last = float(_f(ambient(u))[-1])
            ok = last > 0.25 * R if space.chart == "beltrami" else last < 0.75 * R
            if ok:
                out.append(u)
        return np.array(out)

    return Immersion(
        n, phi, "clifford_torus", {"m": m, "r": r, "s": s}, orient=orient, sampler=sample
    )


CATALOG = ("hyperplane", "hypersphere", "cylinder", "clifford_torus")


def catalog(entry: str, space: SpaceForm, **params) -> Immersion:
    if entry == "hyperplane":
        return hyperplane(space.dim, **params)
    if entry == "hypersphere":
        return hypersphere(space.dim, **params)
    if entry == "cylinder":
        if space.curvature != 0:
            raise ValueError("the cylinder catalog entry lives in the flat chart")
        return cylinder(space.dim, **params)
    if entry == "clifford_torus":
        return clifford_torus(space, **params)
    raise ValueError(f"unknown catalog entry {entry!r}; expected one of {CATALOG}")
