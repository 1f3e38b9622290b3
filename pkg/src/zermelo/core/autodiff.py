"""Nested forward-mode differentiation.

A :class:`Dual` carries a value and a vector of tangents.  Every call to
:func:`jacobian` seeds its inputs with a fresh tag, and arithmetic between
duals of different tags treats the older one as a constant of the newer.
That ordering is what keeps nested derivatives (``jacobian`` of a function
that itself calls ``jacobian``) free of perturbation confusion.

Scalar code written against this module (``+ - * / **`` plus the functions
:func:`sqrt`, :func:`exp`, :func:`log`, :func:`sin`, :func:`cos`) runs
unchanged on floats, complex numbers, and duals of any nesting depth.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from numbers import Complex, Real

import numpy as np

_tag_counter = itertools.count(1)


class DomainError(ValueError):
    """Evaluation outside the domain of a function or chart."""


def _scale(vec, s):
    """Multiply a tangent vector by a (possibly dual) scalar."""
    if isinstance(s, Dual):
        out = np.empty(len(vec), dtype=object)
        for i, v in enumerate(vec):
            out[i] = s * v
        return out
    return vec * s


class Dual:
    __slots__ = ("val", "eps", "tag")
    # lets numpy scalars defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, val, eps, tag):
        self.val = val
        self.eps = eps
        self.tag = tag

    def __repr__(self):
        return f"Dual({self.val!r}, {self.eps!r}, tag={self.tag})"

    # binary operators ----------------------------------------------------
    def _outer(self, other):
        """True when ``other`` must be treated as the outer perturbation."""
        return isinstance(other, Dual) and other.tag > self.tag

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return _elementwise(lambda o: self + o, other)
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return Dual(self.val + other.val, self.eps + other.eps, self.tag)
            if other.tag > self.tag:
                return other.__radd__(self)
        return Dual(self.val + other, self.eps, self.tag)

    def __radd__(self, other):
        if isinstance(other, np.ndarray):
            return _elementwise(lambda o: o + self, other)
        return Dual(other + self.val, self.eps, self.tag)

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return _elementwise(lambda o: self - o, other)
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return Dual(self.val - other.val, self.eps - other.eps, self.tag)
            if other.tag > self.tag:
                return other.__rsub__(self)
        return Dual(self.val - other, self.eps, self.tag)

    def __rsub__(self, other):
        if isinstance(other, np.ndarray):
            return _elementwise(lambda o: o - self, other)
        return Dual(other - self.val, -self.eps, self.tag)

    def __neg__(self):
        return Dual(-self.val, -self.eps, self.tag)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return _elementwise(lambda o: self * o, other)
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return Dual(
                    self.val * other.val,
                    _scale(self.eps, other.val) + _scale(other.eps, self.val),
                    self.tag,
                )
            if other.tag > self.tag:
                return other.__rmul__(self)
        return Dual(self.val * other, _scale(self.eps, other), self.tag)

    def __rmul__(self, other):
        if isinstance(other, np.ndarray):
            return _elementwise(lambda o: o * self, other)
        return Dual(other * self.val, _scale(self.eps, other), self.tag)

    def _reciprocal(self):
        inv = 1.0 / self.val
        return Dual(inv, _scale(self.eps, -(inv * inv)), self.tag)

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return _elementwise(lambda o: self / o, other)
        if isinstance(other, Dual):
            if other.tag >= self.tag:
                return self * other._reciprocal()
        return Dual(self.val / other, _scale(self.eps, 1.0 / other), self.tag)

    def __rtruediv__(self, other):
        if isinstance(other, np.ndarray):
            return _elementwise(lambda o: o / self, other)
        return other * self._reciprocal()

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            p = int(p)
            if p == 0:
                return Dual(self.val ** 0, self.eps * 0.0, self.tag)
            if p < 0:
                return (self ** (-p))._reciprocal()
            base = self.val ** (p - 1)
            return Dual(base * self.val, _scale(self.eps, p * base), self.tag)
        if isinstance(p, Real) and not isinstance(p, Dual):
            base = self.val ** (p - 1)
            return Dual(base * self.val, _scale(self.eps, p * base), self.tag)
        return exp(p * log(self))

    def __rpow__(self, base):
        return exp(self * log(base))

    def __abs__(self):
        return self if primal(self) >= 0 else -self

    # comparisons act on the innermost real value
    def __lt__(self, other):
        return primal(self) < primal(other)

    def __le__(self, other):
        return primal(self) <= primal(other)

    def __gt__(self, other):
        return primal(self) > primal(other)

    def __ge__(self, other):
        return primal(self) >= primal(other)


def _elementwise(fn, arr):
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = fn(v)
    return out


def primal(x):
    """Innermost real (or complex) value of a possibly nested dual."""
    while isinstance(x, Dual):
        x = x.val
    return x


def primal_array(a) -> np.ndarray:
    """Float array of primal values."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return a.real
    if a.dtype != object:
        return a
    return np.vectorize(primal, otypes=[float])(a) if a.size else a.astype(float)


def is_dual(x) -> bool:
    if isinstance(x, Dual):
        return True
    if isinstance(x, np.ndarray) and x.dtype == object:
        return any(isinstance(v, Dual) for v in x.flat)
    return False


def tidy(a):
    """Return a float array if no element carries a tangent, else object."""
    a = np.asarray(a)
    if a.dtype == object and not any(isinstance(v, Dual) for v in a.flat):
        try:
            return a.astype(float)
        except TypeError:
            return a.astype(complex)
    return a


# elementary functions --------------------------------------------------------

def _unary(x, f_real, f_complex, deriv):
    if isinstance(x, Dual):
        return Dual(_unary(x.val, f_real, f_complex, deriv), _scale(x.eps, deriv(x.val)), x.tag)
    if isinstance(x, np.ndarray):
        if x.dtype == object:
            return _elementwise(lambda v: _unary(v, f_real, f_complex, deriv), x)
        return f_complex(x) if np.iscomplexobj(x) else f_real(x)
    if isinstance(x, complex):
        return f_complex(x)
    return f_real(x)


def sqrt(x):
    def real(v):
        if isinstance(v, np.ndarray):
            if np.any(v < 0):
                raise DomainError("sqrt of a negative number")
            return np.sqrt(v)
        if v < 0:
            raise DomainError(f"sqrt of negative number {v!r}")
        return math.sqrt(v)

    def cplx(v):
        return np.sqrt(v) if isinstance(v, np.ndarray) else cmath.sqrt(v)

    return _unary(x, real, cplx, lambda v: 0.5 / sqrt(v))


def exp(x):
    return _unary(
        x,
        lambda v: np.exp(v) if isinstance(v, np.ndarray) else math.exp(v),
        lambda v: np.exp(v) if isinstance(v, np.ndarray) else cmath.exp(v),
        exp,
    )


def log(x):
    def real(v):
        if np.any(np.asarray(v) <= 0):
            raise DomainError("log of a non-positive number")
        return np.log(v) if isinstance(v, np.ndarray) else math.log(v)

    return _unary(
        x,
        real,
        lambda v: np.log(v) if isinstance(v, np.ndarray) else cmath.log(v),
        lambda v: 1.0 / v,
    )


def sin(x):
    return _unary(
        x,
        lambda v: np.sin(v) if isinstance(v, np.ndarray) else math.sin(v),
        lambda v: np.sin(v) if isinstance(v, np.ndarray) else cmath.sin(v),
        cos,
    )


def cos(x):
    return _unary(
        x,
        lambda v: np.cos(v) if isinstance(v, np.ndarray) else math.cos(v),
        lambda v: np.cos(v) if isinstance(v, np.ndarray) else cmath.cos(v),
        lambda v: -sin(v),
    )


# derivative drivers ------------------------------------------------------------

def _seed(x, tag):
    n = len(x)
    eye = np.eye(n)
    out = np.empty(n, dtype=object)
    for i in range(n):
        out[i] = Dual(x[i], eye[i], tag)
    return out


def _as_point(x):
    x = np.asarray(x)
    if x.dtype != object:
        x = x.astype(float) if not np.iscomplexobj(x) else x
    return np.atleast_1d(x)


def jacobian(fn, x):
    """Value and Jacobian of ``fn`` at ``x``.

    ``fn`` maps a 1-d array to a scalar or an array; the Jacobian has shape
    ``value.shape + (len(x),)``.  Works when ``x`` itself holds duals.
    """
    x = _as_point(x)
    n = len(x)
    tag = next(_tag_counter)
    out = fn(_seed(x, tag))
    scalar = not isinstance(out, np.ndarray)
    arr = np.asarray(out, dtype=object) if not scalar else np.array([out], dtype=object)
    vals = np.empty(arr.shape, dtype=object)
    jac = np.empty(arr.shape + (n,), dtype=object)
    for idx, o in np.ndenumerate(arr):
        if isinstance(o, Dual) and o.tag == tag:
            vals[idx] = o.val
            jac[idx] = o.eps
        else:
            vals[idx] = o
            jac[idx] = np.zeros(n)
    vals, jac = tidy(vals), tidy(jac)
    if scalar:
        return vals[0], jac[0]
    return vals, jac


def gradient(fn, x):
    return jacobian(fn, x)[1]


def hessian(fn, x):
    return jacobian(lambda z: jacobian(fn, z)[1], x)[1]


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar function at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray


def eval_jet2(f, x) -> Jet2:
    """Second-order jet of the scalar field ``f`` at ``x``.

    Raises :class:`DomainError` when ``f`` is evaluated outside its domain.
    """
    x = _as_point(x)

    def inner(z):
        v, g = jacobian(f, z)
        out = np.empty(len(z) + 1, dtype=object)
        out[0] = v
        out[1:] = g
        return out

    out, J = jacobian(inner, x)
    hess = np.asarray(J[1:], dtype=float)
    hess = 0.5 * (hess + hess.T)
    return Jet2(float(out[0]), np.asarray(out[1:], dtype=float), hess)


__all__ = [
    "Dual",
    "DomainError",
    "Jet2",
    "cos",
    "eval_jet2",
    "exp",
    "gradient",
    "hessian",
    "is_dual",
    "jacobian",
    "log",
    "primal",
    "primal_array",
    "sin",
    "sqrt",
    "tidy",
]
