"""Finite-difference oracles, kept independent of the dual-number path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import eval_jet2


def fd_gradient(f, x, h: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_jacobian(fn, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of an array-valued function."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(fn(x + e), dtype=float) - np.asarray(fn(x - e), dtype=float)) / (2 * h))
    return np.stack(cols, axis=-1)


def _complex_capable(f, x) -> bool:
    try:
        v = f(np.asarray(x, dtype=complex) + 1e-30j)
    except (TypeError, ValueError):
        return False
    return isinstance(v, complex) or np.iscomplexobj(v)


def fd_hessian(f, x, h: float = 1e-5) -> np.ndarray:
    """Hessian by central differences of complex-step gradients.

    The complex step removes subtractive cancellation in the inner derivative,
    so the outer step can be small.  Falls back to the four-point real
    formula when ``f`` cannot take complex input.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    H = np.empty((n, n))
    if _complex_capable(f, x):
        for j in range(n):
            for k in range(n):
                ej = np.zeros(n, dtype=complex)
                ek = np.zeros(n)
                ej[j] = 1j * h
                ek[k] = h
                up = np.imag(f(x + ej + ek))
                dn = np.imag(f(x + ej - ek))
                H[j, k] = (up - dn) / (2 * h * h)
    else:
        hh = max(h, 1e-4)
        for j in range(n):
            for k in range(n):
                ej = np.zeros(n)
                ek = np.zeros(n)
                ej[j] = hh
                ek[k] = hh
                H[j, k] = (
                    f(x + ej + ek) - f(x + ej - ek) - f(x - ej + ek) + f(x - ej - ek)
                ) / (4 * hh * hh)
    return 0.5 * (H + H.T)


@dataclass(frozen=True)
class FDReport:
    grad_error: float
    hess_error: float

    @property
    def max_error(self) -> float:
        return max(self.grad_error, self.hess_error)


def fd_check(f, x, h_step: float = 1e-5) -> FDReport:
    """Compare the dual-number jet of ``f`` with finite differences."""
    if h_step <= 0:
        raise ValueError("h_step must be positive")
    jet = eval_jet2(f, x)
    g = fd_gradient(f, x, h_step)
    H = fd_hessian(f, x, h_step)
    return FDReport(
        float(np.max(np.abs(g - jet.grad), initial=0.0)),
        float(np.max(np.abs(H - jet.hess), initial=0.0)),
    )
