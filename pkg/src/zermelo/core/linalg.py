"""Small dense linear algebra that also runs on arrays of duals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .autodiff import primal


class NotPositiveDefinite(np.linalg.LinAlgError):
    def __init__(self, eigenvalue: float):
        super().__init__(f"matrix is not positive definite (eigenvalue {eigenvalue:.3e})")
        self.eigenvalue = eigenvalue


def _is_object(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def det(m):
    if not _is_object(m):
        return np.linalg.det(m)
    a = m.copy()
    n = a.shape[0]
    result = 1.0
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(primal(a[r, k])))
        if primal(a[p, k]) == 0:
            return 0.0 * a[0, 0]
        if p != k:
            a[[k, p]] = a[[p, k]]
            result = -result
        result = result * a[k, k]
        for r in range(k + 1, n):
            f = a[r, k] / a[k, k]
            a[r, k:] = a[r, k:] - f * a[k, k:]
    return result


def solve(m, b):
    """Solve ``m x = b`` by Gauss-Jordan with partial pivoting on primals."""
    if not _is_object(m) and not _is_object(b):
        return np.linalg.solve(m, b)
    n = m.shape[0]
    b = np.asarray(b)
    vector = b.ndim == 1
    aug = np.concatenate(
        [np.asarray(m, dtype=object), np.asarray(b, dtype=object).reshape(n, -1)], axis=1
    )
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(primal(aug[r, k])))
        if primal(aug[p, k]) == 0:
            raise np.linalg.LinAlgError("singular matrix")
        if p != k:
            aug[[k, p]] = aug[[p, k]]
        aug[k] = aug[k] / aug[k, k]
        for r in range(n):
            if r != k:
                aug[r] = aug[r] - aug[r, k] * aug[k]
    x = aug[:, n:]
    return x[:, 0] if vector else x


def inv(m):
    if not _is_object(m):
        return np.linalg.inv(m)
    return solve(m, np.eye(m.shape[0]))


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric real matrix with an on-demand definiteness check."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {e.shape}")
        object.__setattr__(self, "entries", 0.5 * (e + e.T))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def is_positive_definite(self, tol: float = 0.0) -> bool:
        return self.min_eigenvalue() > tol


@dataclass(frozen=True)
class GeneralizedEig:
    values: np.ndarray
    vectors: np.ndarray  # columns, B-orthonormal
    residual: float


def solve_sym_geig(A, B, tol: float = 0.0) -> GeneralizedEig:
    """Solve ``A v = lambda B v`` for symmetric A and positive definite B.

    Eigenvalues are ascending; eigenvectors are B-orthonormal columns.
    """
    A = np.asarray(getattr(A, "entries", A), dtype=float)
    B = np.asarray(getattr(B, "entries", B), dtype=float)
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    bmin = float(np.linalg.eigvalsh(B)[0])
    if bmin <= tol:
        raise NotPositiveDefinite(bmin)
    w, v = scipy.linalg.eigh(A, B)
    res = max(
        (float(np.linalg.norm(A @ v[:, i] - w[i] * (B @ v[:, i]))) for i in range(len(w))),
        default=0.0,
    )
    return GeneralizedEig(w, v, res)


def group_eigenvalues(values, tol: float = 1e-7) -> list[list[int]]:
    """Indices of sorted eigenvalues grouped into multiplicity classes."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and abs(v - values[groups[-1][-1]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups
