"""Randers metrics from navigation data (h, W) and their Finsler calculus.

All quantities are for the forward metric.  Backward quantities come from
evaluating at ``-y``.

With ``lam = 1 - |W|_h^2`` and ``w_i = h_ij W^j`` the metric is

    F(y) = (sqrt(lam |y|_h^2 + <w, y>^2) - <w, y>) / lam  =  alpha(y) + beta(y),
    a_ij = (lam h_ij + w_i w_j) / lam^2,      b_i = -w_i / lam.

Functions with a leading underscore or a ``_generic`` suffix accept arrays
of duals; the public methods take and return floats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .core import DomainError, det, inv, jacobian, log, sqrt
from .riemannian import SpaceForm, VectorFieldSpec, christoffel, covariant_data


class NavigationDomainError(DomainError):
    """|W|_h >= 1: the navigation data does not define a Randers metric."""


class ConsistencyError(AssertionError):
    """Two independent routes to the same quantity disagree (a bug signal)."""


def _f(x):
    return np.asarray(x, dtype=float)


def _require_nonzero(y, what="direction"):
    if not np.any(_f(y)):
        raise DomainError(f"undefined for the zero {what}")


@dataclass(frozen=True)
class NavData:
    h: np.ndarray
    w_up: np.ndarray
    w_low: np.ndarray
    b2: object
    lam: object


@dataclass(frozen=True)
class NavigationSpec:
    space: SpaceForm
    W: VectorFieldSpec

    def __post_init__(self):
        if self.W.dim != self.space.dim:
            raise ValueError("vector field and space dimensions differ")

    def data(self, x) -> NavData:
        h = self.space.metric(x)
        w = self.W(x)
        wl = h @ w
        b2 = w @ wl
        b2_val = float(np.real(_primal(b2)))
        if not b2_val < 1.0:
            raise NavigationDomainError(f"|W|_h = {b2_val ** 0.5:.6g} >= 1")
        return NavData(h, w, wl, b2, 1.0 - b2)

    def wind_norm(self, x) -> float:
        h = _f(self.space.metric(_f(x)))
        w = _f(self.W(_f(x)))
        return float(np.sqrt(w @ h @ w))

    def admissible(self, x, margin: float = 0.0) -> bool:
        try:
            return self.space.in_domain(x) and self.wind_norm(x) < 1.0 - margin
        except DomainError:
            return False


def _primal(v):
    from .core import primal

    return primal(v)


@dataclass(frozen=True)
class NavigationBatch:
    F_nav: np.ndarray
    F_ab: np.ndarray
    det_a: np.ndarray
    det_h: np.ndarray
    lam: np.ndarray
    sigma_bh: np.ndarray


@dataclass(frozen=True)
class SprayData:
    G: np.ndarray
    N: np.ndarray
    Gamma: np.ndarray  # Gamma[i, j, k] = Chern Gamma^i_jk


class RandersMetric:
    def __init__(self, nav: NavigationSpec, tol: Tolerances = DEFAULT):
        self.nav = nav
        self.tol = tol

    @property
    def dim(self) -> int:
        return self.nav.space.dim

    # alpha, beta --------------------------------------------------------------
    def a_b(self, x):
        d = self.nav.data(x)
        a = (d.lam * d.h + np.outer(d.w_low, d.w_low)) / (d.lam * d.lam)
        return a, -d.w_low / d.lam

    def F_nav_generic(self, x, y):
        d = self.nav.data(x)
        w0 = d.w_low @ y
        return (sqrt(d.lam * (y @ d.h @ y) + w0 * w0) - w0) / d.lam

    def F_ab_generic(self, x, y):
        a, b = self.a_b(x)
        return sqrt(y @ a @ y) + b @ y

    def F(self, x, y) -> float:
        """Forward Randers norm; both closed forms are evaluated and compared."""
        x, y = _f(x), _f(y)
        _require_nonzero(y)
        Fn = float(self.F_nav_generic(x, y))
        Fab = float(self.F_ab_generic(x, y))
        if abs(Fn - Fab) > 1e-12 * max(abs(Fn), 1e-300) * 10:
            raise ConsistencyError(f"navigation form {Fn!r} != alpha+beta {Fab!r}")
        return Fn

    def evaluate_batch(self, X, Y) -> NavigationBatch:
        """Closed-form quantities at many (x, y) pairs via the batch kernels."""
        from . import kernels

        X, Y = np.atleast_2d(_f(X)), np.atleast_2d(_f(Y))
        H = self.nav.space.metric_batch(X)
        Wup = self.nav.W.eval_batch(X)
        if np.any(np.einsum("mi,mij,mj->m", Wup, H, Wup) >= 1.0):
            raise NavigationDomainError("batch contains points with |W|_h >= 1")
        return NavigationBatch(*kernels.navigation_batch(H, Wup, Y))

    def fundamental_tensor_batch(self, X, Y) -> np.ndarray:
        from . import kernels

        X, Y = np.atleast_2d(_f(X)), np.atleast_2d(_f(Y))
        return kernels.fundamental_tensor_batch(
            self.nav.space.metric_batch(X), self.nav.W.eval_batch(X), Y
        )

    # fundamental tensor -------------------------------------------------------------
    def g_generic(self, x, y):
        a, b = self.a_b(x)
        alpha = sqrt(y @ a @ y)
        alpha_y = (a @ y) / alpha
        F = alpha + b @ y
        F_y = alpha_y + b
        return (F / alpha) * (a - np.outer(alpha_y, alpha_y)) + np.outer(F_y, F_y)

    def fundamental_tensor(self, x, y) -> np.ndarray:
        x, y = _f(x), _f(y)
        _require_nonzero(y)
        return _f(self.g_generic(x, y))

    def fundamental_tensor_autodiff(self, x, y) -> np.ndarray:
        """Oracle: half the y-Hessian of F^2, from the navigation form."""
        from .core import hessian

        x = _f(x)
        return _f(hessian(lambda z: 0.5 * self.F_nav_generic(x, z) ** 2, _f(y)))

    def cartan(self, x, y) -> np.ndarray:
        """C_ijk = 1/2 d g_ij / d y^k."""
        x = _f(x)
        _, dg = jacobian(lambda z: self.g_generic(x, z), _f(y))
        return 0.5 * _f(dg)

    # dual metric and Legendre transform ----------------------------------------------
    def dual_generic(self, x, xi):
        d = self.nav.data(x)
        hinv = inv(d.h)
        return sqrt(xi @ hinv @ xi) + d.w_up @ xi

    def dual(self, x, xi) -> float:
        x, xi = _f(x), _f(xi)
        _require_nonzero(xi, "covector")
        v = float(self.dual_generic(x, xi))
        if v <= 0:
            raise DomainError(f"F*(xi) = {v:.3e} <= 0: covector outside the dual cone")
        return v

    def legendre(self, x, y) -> np.ndarray:
        """L(y)_i = F F_{y^i} = g_ij(y) y^j."""
        x, y = _f(x), _f(y)
        _require_nonzero(y)
        _, Fy = jacobian(lambda z: self.F_nav_generic(x, z), y)
        return self.F(x, y) * _f(Fy)

    def legendre_inv_generic(self, x, xi):
        d = self.nav.data(x)
        hinv = inv(d.h)
        hstar = sqrt(xi @ hinv @ xi)
        Fstar = hstar + d.w_up @ xi
        return Fstar * ((hinv @ xi) / hstar + d.w_up)

    def legendre_inv(self, x, xi) -> np.ndarray:
        """L^{-1}(xi) = F*(xi) dF*/dxi."""
        x, xi = _f(x), _f(xi)
        self.dual(x, xi)
        return _f(self.legendre_inv_generic(x, xi))

    # spray and connections -----------------------------------------------------------
    def spray_generic(self, x, y):
        """Geodesic coefficients G^i from the navigation covariant data."""
        cd = covariant_data(self.nav.space, self.nav.W, x)
        if not float(_primal(cd.w_up @ cd.h @ cd.w_up)) < 1.0:
            raise NavigationDomainError("|W|_h >= 1")
        F = self.F_nav_generic(x, y)
        G_bar = 0.5 * np.einsum("ijk,j,k->i", cd.christoffel, y, y)
        s_i0 = cd.s_mixed @ y
        r_0 = cd.r_vec @ y
        r_00 = y @ cd.r @ y
        E = 2.0 * F * r_0 - r_00 - F * F * cd.r_scalar
        return (
            G_bar
            - F * s_i0
            - 0.5 * F * F * (cd.r_up + cd.s_up)
            + 0.5 * (y / F - cd.w_up) * E
        )

    def spray(self, x, y) -> np.ndarray:
        x, y = _f(x), _f(y)
        _require_nonzero(y)
        return _f(self.spray_generic(x, y))

    def spray_from_metric(self, x, y) -> np.ndarray:
        """Oracle: G^i = 1/4 g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})."""
        x, y = _f(x), _f(y)
        n = self.dim

        def F2(z):
            return self.F_nav_generic(z[:n], z[n:]) ** 2

        z = np.concatenate([x, y])
        from .core import hessian

        _, dF2 = jacobian(F2, z)
        H = _f(hessian(F2, z))
        g = self.fundamental_tensor(x, y)
        rhs = H[n:, :n] @ y - _f(dF2)[:n]
        return 0.25 * np.linalg.solve(g, rhs)

    def nonlinear_connection(self, x, y) -> np.ndarray:
        """N^i_j in closed form (derivative of the spray formula)."""
        x, y = _f(x), _f(y)
        _require_nonzero(y)
        cd = covariant_data(self.nav.space, self.nav.W, x)
        cd_f = {k: _f(v) for k, v in cd.__dict__.items()}
        _, Fy = jacobian(lambda z: self.F_nav_generic(x, z), y)
        F = self.F(x, y)
        Fy = _f(Fy)
        n = self.dim
        N_bar = np.einsum("ijk,k->ij", cd_f["christoffel"], y)
        s_i0 = cd_f["s_mixed"] @ y
        r = cd_f["r_scalar"]
        r_0 = cd_f["r_vec"] @ y
        r_00 = y @ cd_f["r"] @ y
        r_j0 = cd_f["r"] @ y
        E = 2.0 * F * r_0 - r_00 - F * F * r
        dE = 2.0 * Fy * r_0 + 2.0 * F * cd_f["r_vec"] - 2.0 * r_j0 - 2.0 * F * Fy * r
        return (
            N_bar
            - np.outer(s_i0, Fy)
            - F * cd_f["s_mixed"]
            - F * np.outer(cd_f["r_up"] + cd_f["s_up"], Fy)
            + 0.5 * (np.eye(n) / F - np.outer(y, Fy) / F**2) * E
            + 0.5 * np.outer(y / F - cd_f["w_up"], dE)
        )

    def chern(self, x, y, N=None) -> np.ndarray:
        """Chern coefficients from horizontal derivatives of g:

        Gamma^i_jk = 1/2 g^il (dg_lj/dx^k + dg_lk/dx^j - dg_jk/dx^l),
        with d/dx^k = partial_k - N^m_k partial_{y^m}.
        """
        x, y = _f(x), _f(y)
        n = self.dim
        if N is None:
            N = self.nonlinear_connection(x, y)
        g, dg = jacobian(lambda z: self.g_generic(z[:n], z[n:]), np.concatenate([x, y]))
        g, dg = _f(g), _f(dg)
        dgx, dgy = dg[..., :n], dg[..., n:]
        delta = dgx - np.einsum("ljm,mk->ljk", dgy, N)  # delta[l, j, k] = d g_lj / dx^k
        lower = 0.5 * (delta + delta.transpose(0, 2, 1) - np.einsum("jkl->ljk", delta))
        return np.einsum("il,ljk->ijk", np.linalg.inv(g), lower)

    def spray_and_connections(self, x, y) -> SprayData:
        x, y = _f(x), _f(y)
        _require_nonzero(y)
        G, dG = jacobian(lambda z: self.spray_generic(x, z), y)
        N = self.nonlinear_connection(x, y)
        err = float(np.max(np.abs(N - _f(dG))))
        scale = max(1.0, float(np.max(np.abs(N))))
        if err > self.tol.identity * scale:
            raise ConsistencyError(f"closed-form N differs from dG/dy by {err:.3e}")
        return SprayData(_f(G), N, self.chern(x, y, N))

    def covariant_derivative(self, x, w_ref, v, X) -> np.ndarray:
        """D^w_v X = v^j dX^i/dx^j + Gamma^i_jk(w) v^j X^k for a vector field X."""
        x, w_ref, v = _f(x), _f(w_ref), _f(v)
        _require_nonzero(w_ref, "reference vector")
        Xv, dX = jacobian(X, x)
        Gam = self.chern(x, w_ref)
        return _f(dX) @ v + np.einsum("ijk,j,k->i", Gam, v, _f(Xv))

    # volume and S-curvature ----------------------------------------------------------
    def bh_density_generic(self, x):
        a, b = self.a_b(x)
        nb2 = b @ inv(a) @ b
        return (1.0 - nb2) ** ((self.dim + 1) / 2.0) * sqrt(det(a))

    def bh_density(self, x) -> float:
        """Busemann-Hausdorff density; checked against sqrt(det h)."""
        x = _f(x)
        sigma = float(self.bh_density_generic(x))
        ref = float(np.sqrt(np.linalg.det(_f(self.nav.space.metric(x)))))
        if abs(sigma - ref) > 1e-10 * max(1.0, ref):
            raise ConsistencyError(f"BH density {sigma!r} != sqrt(det h) {ref!r}")
        return sigma

    def s_curvature(self, x, y) -> float:
        x, y = _f(x), _f(y)
        _require_nonzero(y)
        _, dG = jacobian(lambda z: self.spray_generic(x, z), y)
        _, dlns = jacobian(lambda z: log(self.bh_density_generic(z)), x)
        return float(np.trace(_f(dG)) - y @ _f(dlns))

    # flag curvature ------------------------------------------------------------------
    def riemann_curvature(self, x, y) -> np.ndarray:
        """R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k
        - dG^i/dy^j dG^j/dy^k."""
        x, y = _f(x), _f(y)
        n = self.dim

        def Gz(z):
            return self.spray_generic(z[:n], z[n:])

        z0 = np.concatenate([x, y])

        def first(z):
            return jacobian(Gz, z)[1]

        J1, J2 = jacobian(first, z0)
        J1, J2 = _f(J1), _f(J2)
        G = self.spray(x, y)
        Gx, Gy = J1[:, :n], J1[:, n:]
        # J2[i, a, b] = d_b d_a G^i
        Gxy = np.einsum("ikj->ijk", J2[:, n:, :n])  # d2 G^i / dx^j dy^k
        Gyy = J2[:, n:, n:]
        return 2.0 * Gx - np.einsum("j,ijk->ik", y, Gxy) + 2.0 * np.einsum("j,ijk->ik", G, Gyy) - Gy @ Gy

    def flag_curvature(self, x, y, v) -> float:
        x, y, v = _f(x), _f(y), _f(v)
        _require_nonzero(y)
        g = self.fundamental_tensor(x, y)
        den = (y @ g @ y) * (v @ g @ v) - (y @ g @ v) ** 2
        if den <= 1e-14 * (y @ g @ y) * (v @ g @ v):
            raise DomainError("degenerate flag: v is parallel to y")
        R = self.riemann_curvature(x, y)
        return float((v @ g @ (R @ v)) / den)

    # gradient and Laplacian ------------------------------------------------------------
    def grad_generic(self, x, df):
        return self.legendre_inv_generic(x, df)

    def gradient(self, f, x) -> np.ndarray:
        """Finsler gradient L^{-1}(df)."""
        x = _f(x)
        _, df = jacobian(f, x)
        df = _f(df)
        self._require_regular(x, df)
        return _f(self.grad_generic(x, df))

    def _require_regular(self, x, df):
        hinv = np.linalg.inv(_f(self.nav.space.metric(x)))
        if np.sqrt(df @ hinv @ df) < self.tol.critical:
            raise DomainError(f"critical point of f at {x}: not in the regular set")

    def laplacian_divergence(self, f, x) -> float:
        """(1/sigma) d_i (sigma grad f^i)."""
        x = _f(x)

        def flux(z):
            _, df = jacobian(f, z)
            return self.bh_density_generic(z) * self.grad_generic(z, df)

        _, J = jacobian(flux, x)
        return float(np.trace(_f(J)) / self.bh_density(x))

    def laplacian_trace(self, f, x) -> float:
        """tr(D^{grad f} grad f) - S(grad f)."""
        x = _f(x)

        def gradf(z):
            _, df = jacobian(f, z)
            return self.grad_generic(z, df)

        V, J = jacobian(gradf, x)
        V, J = _f(V), _f(J)
        Gam = self.chern(x, V)
        hess_trace = float(np.trace(J) + np.einsum("iik,k->", Gam, V))
        return hess_trace - self.s_curvature(x, V)

    def laplacian(self, f, x, cross_check: bool = True) -> float:
        x = _f(x)
        _, df = jacobian(f, x)
        self._require_regular(x, _f(df))
        div = self.laplacian_divergence(f, x)
        if cross_check:
            tr = self.laplacian_trace(f, x)
            if abs(div - tr) > self.tol.gradient * max(1.0, abs(div)):
                raise ConsistencyError(f"divergence-form {div!r} != trace-form {tr!r}")
        return div


# module-level entry points ---------------------------------------------------------------

def F_eval(m: RandersMetric, x, y) -> float:
    return m.F(x, y)


def fundamental_tensor(m: RandersMetric, x, y) -> np.ndarray:
    return m.fundamental_tensor(x, y)


def cartan_tensor(m: RandersMetric, x, y) -> np.ndarray:
    return m.cartan(x, y)


def spray_and_connections(m: RandersMetric, x, y) -> SprayData:
    return m.spray_and_connections(x, y)


def s_curvature(m: RandersMetric, x, y) -> float:
    return m.s_curvature(x, y)


def bh_volume_density(m: RandersMetric, x) -> float:
    return m.bh_density(x)


def flag_curvature(m: RandersMetric, x, y, v) -> float:
    return m.flag_curvature(x, y, v)


def finsler_grad(m: RandersMetric, f, x) -> np.ndarray:
    return m.gradient(f, x)


def finsler_laplacian(m: RandersMetric, f, x) -> float:
    return m.laplacian(f, x)


def covariant_derivative(m: RandersMetric, x, w_ref, v, X) -> np.ndarray:
    return m.covariant_derivative(x, w_ref, v, X)


def randers_from(space: SpaceForm, W: VectorFieldSpec, tol: Tolerances = DEFAULT) -> RandersMetric:
    return RandersMetric(NavigationSpec(space, W), tol)
