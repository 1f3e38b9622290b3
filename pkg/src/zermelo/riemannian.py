"""Riemannian space forms on explicit charts, and covariant calculus of
vector fields on them.

Charts, all of constant sectional curvature ``c``:

* ``cartesian``      c = 0, h = |dx|^2
* ``poincare_ball``  c < 0, h = 4|dx|^2 / (1 + c|x|^2)^2 on |x|^2 < 1/|c|
* ``stereographic``  c > 0, same formula on all of R^n
* ``beltrami``       c != 0, h = ((1 + c|x|^2)|dx|^2 - c<x,dx>^2) / (1 + c|x|^2)^2
  (the projective model: geodesics are straight lines)

Everything that takes a point ``x`` also accepts arrays of duals, so any of
these quantities can be differentiated again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT, Tolerances
from .core import DomainError, SymMatrix, det, inv, jacobian, primal_array, sqrt

CHARTS = ("cartesian", "poincare_ball", "stereographic", "beltrami")


@dataclass(frozen=True)
class SpaceForm:
    dim: int
    curvature: float = 0.0
    chart: str = "cartesian"
    # test hook: x -> metric matrix; overrides the chart formula
    metric_fn: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}; expected one of {CHARTS}")
        c = self.curvature
        if self.metric_fn is None:
            if self.chart == "cartesian" and c != 0:
                raise ValueError("cartesian chart requires curvature 0")
            if self.chart == "poincare_ball" and not c < 0:
                raise ValueError("poincare_ball chart requires negative curvature")
            if self.chart == "stereographic" and not c > 0:
                raise ValueError("stereographic chart requires positive curvature")
            if self.chart == "beltrami" and c == 0:
                raise ValueError("beltrami chart requires nonzero curvature")

    # domain -----------------------------------------------------------------
    def in_domain(self, x) -> bool:
        x = primal_array(x)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        if self.chart in ("poincare_ball", "beltrami"):
            return 1.0 + self.curvature * float(x @ x) > 0
        return True

    def _check(self, x):
        if not self.in_domain(x):
            raise DomainError(f"point {primal_array(x)} outside the {self.chart} chart domain")

    def default_radius(self) -> float:
        """Radius of a ball comfortably inside the chart domain."""
        if self.chart in ("poincare_ball", "beltrami") and self.curvature < 0:
            return 0.9 / math.sqrt(-self.curvature)
        if self.curvature > 0:
            return 1.0 / math.sqrt(self.curvature)
        return 1.0

    def sample(self, rng: np.random.Generator, count: int, radius=None, center=None) -> np.ndarray:
        """Uniform samples from a ball inside the domain."""
        r = self.default_radius() if radius is None else radius
        c = np.zeros(self.dim) if center is None else np.asarray(center, dtype=float)
        d = rng.normal(size=(count, self.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        rad = r * rng.random(count) ** (1.0 / self.dim)
        return c + d * rad[:, None]

    # metric -------------------------------------------------------------------
    def metric(self, x):
        """h_ij at x (generic in the scalar type)."""
        self._check(x)
        if self.metric_fn is not None:
            return self.metric_fn(x)
        n = self.dim
        eye = np.eye(n)
        if self.chart == "cartesian":
            return eye
        q = 1.0 + self.curvature * (x @ x)
        if self.chart in ("poincare_ball", "stereographic"):
            return eye * (4.0 / (q * q))
        return (eye * q - self.curvature * np.outer(x, x)) / (q * q)

    def metric_batch(self, X: np.ndarray) -> np.ndarray:
        """Vectorized h_ij over an (m, n) array of float points."""
        X = np.asarray(X, dtype=float)
        m, n = X.shape
        if self.metric_fn is not None:
            return np.stack([self.metric_fn(x) for x in X])
        eye = np.broadcast_to(np.eye(n), (m, n, n))
        if self.chart == "cartesian":
            return eye.copy()
        q = 1.0 + self.curvature * np.einsum("mi,mi->m", X, X)
        if np.any(q <= 0):
            raise DomainError("batch contains points outside the chart domain")
        if self.chart in ("poincare_ball", "stereographic"):
            return eye * (4.0 / q**2)[:, None, None]
        return (eye * q[:, None, None] - self.curvature * np.einsum("mi,mj->mij", X, X)) / (
            q**2
        )[:, None, None]

    def volume_density(self, x):
        return sqrt(det(self.metric(x)))


def _is_obj(x) -> bool:
    return isinstance(x, np.ndarray) and x.dtype == object


def metric_at(space: SpaceForm, x) -> SymMatrix:
    return SymMatrix(np.asarray(space.metric(np.asarray(x, dtype=float)), dtype=float))


def christoffel(space: SpaceForm, x):
    """Levi-Civita symbols ``G[i, j, k]`` = Gamma^i_jk from autodiff of h."""
    h, dh = jacobian(space.metric, x)  # dh[i, j, k] = d_k h_ij
    hinv = inv(h)
    # lower[l, j, k] = 1/2 (d_k h_lj + d_j h_lk - d_l h_jk)
    lower = 0.5 * (dh + dh.transpose(0, 2, 1) - np.einsum("jkl->ljk", dh))
    return np.einsum("il,ljk->ijk", hinv, lower)


def riemann_tensor(space: SpaceForm, x):
    """R^i_jkl with R(d_k, d_l) d_j = R^i_jkl d_i."""
    Gam, dGam = jacobian(lambda z: christoffel(space, z), x)  # dGam[i,j,k,m] = d_m Gam^i_jk
    term1 = np.einsum("iljk->ijkl", dGam)  # d_k Gam^i_lj
    term2 = np.einsum("ikjl->ijkl", dGam)  # d_l Gam^i_kj
    term3 = np.einsum("ikm,mlj->ijkl", Gam, Gam)
    term4 = np.einsum("ilm,mkj->ijkl", Gam, Gam)
    return term1 - term2 + term3 - term4


def sectional_curvature(space: SpaceForm, x, u, v) -> float:
    x = np.asarray(x, dtype=float)
    R = np.asarray(riemann_tensor(space, x), dtype=float)
    h = np.asarray(space.metric(x), dtype=float)
    Rlow = np.einsum("im,mjkl->ijkl", h, R)
    num = np.einsum("ijkl,i,j,k,l->", Rlow, u, v, u, v)
    den = (u @ h @ u) * (v @ h @ v) - (u @ h @ v) ** 2
    return float(num / den)


def riem_grad_hess_lap(space: SpaceForm, f, x):
    """h-gradient, h-Hessian and Laplace-Beltrami operator of f at x."""
    x = np.asarray(x, dtype=float)
    from .core import eval_jet2

    jet = eval_jet2(f, x)
    h = np.asarray(space.metric(x), dtype=float)
    hinv = np.linalg.inv(h)
    Gam = np.asarray(christoffel(space, x), dtype=float)
    grad = hinv @ jet.grad
    hess = jet.hess - np.einsum("kij,k->ij", Gam, jet.grad)
    lap = float(np.einsum("ij,ij->", hinv, hess))
    return grad, hess, lap


# vector fields -----------------------------------------------------------------

def _upper_to_antisym(dim: int, upper) -> np.ndarray:
    Q = np.zeros((dim, dim))
    if len(upper) == 0:
        return Q
    iu = np.triu_indices(dim, 1)
    if len(upper) != len(iu[0]):
        raise ValueError(f"expected {len(iu[0])} upper-triangle entries, got {len(upper)}")
    Q[iu] = upper
    return Q - Q.T


def antisym_upper(Q) -> tuple:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or not np.array_equal(Q, -Q.T):
        raise ValueError("Q must be an exactly antisymmetric square matrix")
    return tuple(float(v) for v in Q[np.triu_indices(Q.shape[0], 1)])


@dataclass(frozen=True)
class VectorFieldSpec:
    """A vector field given by chart components.

    ``affine``:      W = -2 k0 x + x Q + e
    ``projective``:  W = x Q + e + c <e, x> x
    ``custom``:      W = components(x)
    """

    kind: str
    dim: int
    k0: float = 0.0
    q_upper: tuple = ()
    e: tuple = ()
    curvature: float = 0.0
    components: Callable | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("affine", "projective", "custom"):
            raise ValueError(f"unknown vector field kind {self.kind!r}")
        if self.kind == "custom" and self.components is None:
            raise ValueError("custom vector field needs components")
        if self.e and len(self.e) != self.dim:
            raise ValueError("e has the wrong length")
        _upper_to_antisym(self.dim, self.q_upper)

    @property
    def Q(self) -> np.ndarray:
        return _upper_to_antisym(self.dim, self.q_upper)

    @property
    def e_vec(self) -> np.ndarray:
        return np.asarray(self.e, dtype=float) if self.e else np.zeros(self.dim)

    def __call__(self, x):
        if self.kind == "custom":
            return np.asarray(self.components(x))
        Q, e = self.Q, self.e_vec
        if self.kind == "affine":
            return -2.0 * self.k0 * x + x @ Q + e
        return x @ Q + e + self.curvature * (x @ e) * x

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.kind == "custom":
            return np.stack([np.asarray(self(x), dtype=float) for x in X])
        Q, e = self.Q, self.e_vec
        if self.kind == "affine":
            return -2.0 * self.k0 * X + X @ Q + e
        return X @ Q + e + self.curvature * (X @ e)[:, None] * X


def affine_field(dim: int, k0: float = 0.0, Q=None, e=None, label: str = "") -> VectorFieldSpec:
    return VectorFieldSpec(
        "affine",
        dim,
        k0=float(k0),
        q_upper=antisym_upper(Q) if Q is not None else (),
        e=tuple(float(v) for v in e) if e is not None else (),
        label=label,
    )


def projective_field(dim: int, curvature: float, Q=None, e=None, label: str = "") -> VectorFieldSpec:
    return VectorFieldSpec(
        "projective",
        dim,
        q_upper=antisym_upper(Q) if Q is not None else (),
        e=tuple(float(v) for v in e) if e is not None else (),
        curvature=float(curvature),
        label=label,
    )


def custom_field(dim: int, components: Callable, label: str = "") -> VectorFieldSpec:
    return VectorFieldSpec("custom", dim, components=components, label=label)


@dataclass(frozen=True)
class CovariantData:
    h: np.ndarray
    h_inv: np.ndarray
    christoffel: np.ndarray
    w_up: np.ndarray
    w_low: np.ndarray
    w_cov: np.ndarray  # w_cov[i, j] = w_{i|j}
    r: np.ndarray
    s: np.ndarray
    r_vec: np.ndarray  # r_j = w^i r_ij
    s_vec: np.ndarray  # s_j = w^i s_ij
    r_scalar: object  # r = r_j w^j
    r_up: np.ndarray
    s_up: np.ndarray
    s_mixed: np.ndarray  # s^i_j


def covariant_data(space: SpaceForm, W: VectorFieldSpec, x) -> CovariantData:
    h = space.metric(x)
    hinv = inv(h)
    Gam = christoffel(space, x)
    w_low, dw = jacobian(lambda z: space.metric(z) @ W(z), x)  # dw[i, j] = d_j w_i
    w_up = W(x)
    w_cov = dw - np.einsum("kij,k->ij", Gam, w_low)
    r = 0.5 * (w_cov + w_cov.T)
    s = 0.5 * (w_cov - w_cov.T)
    r_vec = w_up @ r
    s_vec = w_up @ s
    return CovariantData(
        h=h,
        h_inv=hinv,
        christoffel=Gam,
        w_up=w_up,
        w_low=w_low,
        w_cov=w_cov,
        r=r,
        s=s,
        r_vec=r_vec,
        s_vec=s_vec,
        r_scalar=r_vec @ w_up,
        r_up=hinv @ r_vec,
        s_up=hinv @ s_vec,
        s_mixed=hinv @ s,
    )


@dataclass(frozen=True)
class FieldClass:
    kind: str  # "killing" | "homothetic" | "neither"
    k0: float
    residual: float
    samples: int

    @property
    def isotropic(self) -> bool:
        return self.kind != "neither"


def classify_field(
    space: SpaceForm,
    W: VectorFieldSpec,
    samples: int = 64,
    seed: int = 0,
    radius: float | None = None,
    tol: Tolerances = DEFAULT,
) -> FieldClass:
    """Least-squares fit of r_ij = -2 k h_ij with constant k over sampled points."""
    if samples < 1:
        raise ValueError("need at least one sample point")
    rng = np.random.default_rng(seed)
    pts = space.sample(rng, samples, radius)
    rs, hs = [], []
    for x in pts:
        cd = covariant_data(space, W, x)
        rs.append(np.asarray(cd.r, dtype=float))
        hs.append(np.asarray(cd.h, dtype=float))
    rs, hs = np.array(rs), np.array(hs)
    k = -float(np.sum(rs * hs)) / (2.0 * float(np.sum(hs * hs)))
    resid = float(np.max(np.abs(rs + 2.0 * k * hs)))
    scale = max(1.0, float(np.max(np.abs(hs))))
    if resid > tol.identity * scale:
        kind = "neither"
    elif abs(k) <= tol.identity:
        kind, k = "killing", 0.0
    else:
        kind = "homothetic"
    return FieldClass(kind, k, resid, samples)


# sphere embeddings ---------------------------------------------------------------

def sphere_to_chart(space: SpaceForm, X):
    """Chart coordinates of a point on the sphere of radius 1/sqrt(c) in R^{n+1}."""
    c = space.curvature
    if c <= 0:
        raise ValueError("sphere embedding needs positive curvature")
    R = 1.0 / math.sqrt(c)
    n = space.dim
    if space.chart == "stereographic":
        return R * X[:n] / (R - X[n])
    if space.chart == "beltrami":
        return R * X[:n] / X[n]
    raise ValueError(f"no sphere embedding for chart {space.chart!r}")


def chart_to_sphere(space: SpaceForm, x):
    c = space.curvature
    R = 1.0 / math.sqrt(c)
    xu = x * math.sqrt(c)
    q = xu @ xu
    dtype = object if _is_obj(x) else np.result_type(xu, float)
    if space.chart == "stereographic":
        U = np.concatenate([2.0 * xu, np.array([q - 1.0], dtype=dtype)])
        return R * U / (q + 1.0)
    if space.chart == "beltrami":
        U = np.concatenate([xu, np.array([1.0], dtype=dtype)])
        return R * U / sqrt(1.0 + q)
    raise ValueError(f"no sphere embedding for chart {space.chart!r}")


def sphere_pushforward(space: SpaceForm, X, V):
    """Chart components of an ambient tangent vector V at X on the sphere."""
    R = 1.0 / math.sqrt(space.curvature)
    n = space.dim
    if space.chart == "stereographic":
        d = R - X[n]
        return R * V[:n] / d + R * X[:n] * V[n] / (d * d)
    if space.chart == "beltrami":
        return R * V[:n] / X[n] - R * X[:n] * V[n] / (X[n] * X[n])
    raise ValueError(f"no sphere embedding for chart {space.chart!r}")


def sphere_rotation_field(space: SpaceForm, Q, label: str = "") -> VectorFieldSpec:
    """Chart components of the Killing field X -> X Q of the sphere (Q antisymmetric,
    size n+1), pushed forward through the chart."""
    Q = np.asarray(Q, dtype=float)
    antisym_upper(Q)

    def comps(x):
        X = chart_to_sphere(space, x)
        return sphere_pushforward(space, X, X @ Q)

    return custom_field(space.dim, comps, label=label or "sphere rotation")
