"""Batched closed-form Randers kernels over many points.

Each kernel takes per-point metric matrices ``H`` (m, n, n), wind vectors
``Wup`` (m, n) and direction/covector arrays (m, n).  Two implementations
exist: numba-compiled loops and vectorized numpy.  ``ZERMELO_DISABLE_NUMBA=1``
in the environment selects the numpy path at import time; both are always
importable under their explicit names for comparison.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


USE_NUMBA = HAVE_NUMBA and os.environ.get("ZERMELO_DISABLE_NUMBA", "0") not in ("1", "true", "yes")


# numpy ---------------------------------------------------------------------------

def navigation_batch_numpy(H, Wup, Y):
    """Returns (F_nav, F_ab, det_a, det_h, lam, sigma_bh) per point."""
    wl = np.einsum("mij,mj->mi", H, Wup)
    b2 = np.einsum("mi,mi->m", Wup, wl)
    lam = 1.0 - b2
    w0 = np.einsum("mi,mi->m", wl, Y)
    hy = np.einsum("mi,mij,mj->m", Y, H, Y)
    F_nav = (np.sqrt(lam * hy + w0 * w0) - w0) / lam
    A = (lam[:, None, None] * H + np.einsum("mi,mj->mij", wl, wl)) / (lam**2)[:, None, None]
    b = -wl / lam[:, None]
    F_ab = np.sqrt(np.einsum("mi,mij,mj->m", Y, A, Y)) + np.einsum("mi,mi->m", b, Y)
    det_a = np.linalg.det(A)
    det_h = np.linalg.det(H)
    nb2 = np.einsum("mi,mi->m", b, np.linalg.solve(A, b[..., None])[..., 0])
    n = H.shape[1]
    sigma = (1.0 - nb2) ** ((n + 1) / 2.0) * np.sqrt(det_a)
    return F_nav, F_ab, det_a, det_h, lam, sigma


def fundamental_tensor_batch_numpy(H, Wup, Y):
    wl = np.einsum("mij,mj->mi", H, Wup)
    lam = 1.0 - np.einsum("mi,mi->m", Wup, wl)
    A = (lam[:, None, None] * H + np.einsum("mi,mj->mij", wl, wl)) / (lam**2)[:, None, None]
    b = -wl / lam[:, None]
    Ay = np.einsum("mij,mj->mi", A, Y)
    alpha = np.sqrt(np.einsum("mi,mi->m", Y, Ay))
    ay = Ay / alpha[:, None]
    F = alpha + np.einsum("mi,mi->m", b, Y)
    Fy = ay + b
    return (F / alpha)[:, None, None] * (A - np.einsum("mi,mj->mij", ay, ay)) + np.einsum(
        "mi,mj->mij", Fy, Fy
    )


def dual_batch_numpy(H, Wup, Xi):
    """Returns (F*, L^{-1}(xi)) per point."""
    hinv_xi = np.linalg.solve(H, Xi[..., None])[..., 0]
    hstar = np.sqrt(np.einsum("mi,mi->m", Xi, hinv_xi))
    Fstar = hstar + np.einsum("mi,mi->m", Wup, Xi)
    return Fstar, Fstar[:, None] * (hinv_xi / hstar[:, None] + Wup)


# numba ------------------------------------------------------------------------------
# Per-point LAPACK calls dominate for n <= 4, so the loops use small inline
# eliminations instead.

@njit(cache=True)
def _det_small(M, work):
    n = M.shape[0]
    for i in range(n):
        for j in range(n):
            work[i, j] = M[i, j]
    det = 1.0
    for k in range(n):
        p = k
        for i in range(k + 1, n):
            if abs(work[i, k]) > abs(work[p, k]):
                p = i
        if work[p, k] == 0.0:
            return 0.0
        if p != k:
            for j in range(n):
                t = work[k, j]
                work[k, j] = work[p, j]
                work[p, j] = t
            det = -det
        det *= work[k, k]
        for i in range(k + 1, n):
            f = work[i, k] / work[k, k]
            for j in range(k, n):
                work[i, j] -= f * work[k, j]
    return det


@njit(cache=True)
def _solve_small(M, b, work, out):
    n = M.shape[0]
    for i in range(n):
        for j in range(n):
            work[i, j] = M[i, j]
        out[i] = b[i]
    for k in range(n):
        p = k
        for i in range(k + 1, n):
            if abs(work[i, k]) > abs(work[p, k]):
                p = i
        if p != k:
            for j in range(n):
                t = work[k, j]
                work[k, j] = work[p, j]
                work[p, j] = t
            t = out[k]
            out[k] = out[p]
            out[p] = t
        for i in range(k + 1, n):
            f = work[i, k] / work[k, k]
            for j in range(k, n):
                work[i, j] -= f * work[k, j]
            out[i] -= f * out[k]
    for k in range(n - 1, -1, -1):
        s = out[k]
        for j in range(k + 1, n):
            s -= work[k, j] * out[j]
        out[k] = s / work[k, k]


@njit(cache=True)
def _navigation_loop(H, Wup, Y):
    m, n = Wup.shape
    F_nav = np.empty(m)
    F_ab = np.empty(m)
    det_a = np.empty(m)
    det_h = np.empty(m)
    lam_out = np.empty(m)
    sigma = np.empty(m)
    A = np.empty((n, n))
    work = np.empty((n, n))
    Ainv_b = np.empty(n)
    wl = np.empty(n)
    b = np.empty(n)
    for p in range(m):
        h = H[p]
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += h[i, j] * Wup[p, j]
            wl[i] = s
        b2 = 0.0
        w0 = 0.0
        hy = 0.0
        for i in range(n):
            b2 += Wup[p, i] * wl[i]
            w0 += wl[i] * Y[p, i]
            for j in range(n):
                hy += Y[p, i] * h[i, j] * Y[p, j]
        lam = 1.0 - b2
        F_nav[p] = (np.sqrt(lam * hy + w0 * w0) - w0) / lam
        ay = 0.0
        by = 0.0
        for i in range(n):
            b[i] = -wl[i] / lam
            by += b[i] * Y[p, i]
            for j in range(n):
                A[i, j] = (lam * h[i, j] + wl[i] * wl[j]) / (lam * lam)
        for i in range(n):
            for j in range(n):
                ay += Y[p, i] * A[i, j] * Y[p, j]
        F_ab[p] = np.sqrt(ay) + by
        det_a[p] = _det_small(A, work)
        det_h[p] = _det_small(h, work)
        _solve_small(A, b, work, Ainv_b)
        nb2 = 0.0
        for i in range(n):
            nb2 += b[i] * Ainv_b[i]
        sigma[p] = (1.0 - nb2) ** ((n + 1) / 2.0) * np.sqrt(det_a[p])
        lam_out[p] = lam
    return F_nav, F_ab, det_a, det_h, lam_out, sigma


@njit(cache=True)
def _fundamental_loop(H, Wup, Y):
    m, n = Wup.shape
    out = np.empty((m, n, n))
    A = np.empty((n, n))
    wl = np.empty(n)
    b = np.empty(n)
    ay = np.empty(n)
    for p in range(m):
        h = H[p]
        b2 = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += h[i, j] * Wup[p, j]
            wl[i] = s
            b2 += Wup[p, i] * s
        lam = 1.0 - b2
        for i in range(n):
            b[i] = -wl[i] / lam
            for j in range(n):
                A[i, j] = (lam * h[i, j] + wl[i] * wl[j]) / (lam * lam)
        alpha2 = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += A[i, j] * Y[p, j]
            ay[i] = s
            alpha2 += Y[p, i] * s
        alpha = np.sqrt(alpha2)
        F = alpha
        for i in range(n):
            ay[i] /= alpha
            F += b[i] * Y[p, i]
        for i in range(n):
            for j in range(n):
                out[p, i, j] = (F / alpha) * (A[i, j] - ay[i] * ay[j]) + (ay[i] + b[i]) * (ay[j] + b[j])
    return out


@njit(cache=True)
def _dual_loop(H, Wup, Xi):
    m, n = Wup.shape
    Fstar = np.empty(m)
    L = np.empty((m, n))
    work = np.empty((n, n))
    hx = np.empty(n)
    for p in range(m):
        _solve_small(H[p], Xi[p], work, hx)
        hs = 0.0
        wx = 0.0
        for i in range(n):
            hs += Xi[p, i] * hx[i]
            wx += Wup[p, i] * Xi[p, i]
        hs = np.sqrt(hs)
        Fstar[p] = hs + wx
        for i in range(n):
            L[p, i] = Fstar[p] * (hx[i] / hs + Wup[p, i])
    return Fstar, L


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def navigation_batch_numba(H, Wup, Y):
    return _navigation_loop(_c(H), _c(Wup), _c(Y))


def fundamental_tensor_batch_numba(H, Wup, Y):
    return _fundamental_loop(_c(H), _c(Wup), _c(Y))


def dual_batch_numba(H, Wup, Xi):
    return _dual_loop(_c(H), _c(Wup), _c(Xi))


if USE_NUMBA:
    navigation_batch = navigation_batch_numba
    fundamental_tensor_batch = fundamental_tensor_batch_numba
    dual_batch = dual_batch_numba
else:
    navigation_batch = navigation_batch_numpy
    fundamental_tensor_batch = fundamental_tensor_batch_numpy
    dual_batch = dual_batch_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
