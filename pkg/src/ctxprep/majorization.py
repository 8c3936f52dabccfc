"""Majorization of real vectors and of density-matrix spectra."""
from __future__ import annotations

import numpy as np

from .operators import QuantumState

MAJORIZATION_TOL = 1e-9


def _padded_desc(a, b):
    a = np.sort(np.asarray(a, dtype=float).ravel())[::-1]
    b = np.sort(np.asarray(b, dtype=float).ravel())[::-1]
    n = max(a.size, b.size)
    return np.pad(a, (0, n - a.size)), np.pad(b, (0, n - b.size))


def majorizes(a, b, tol: float = MAJORIZATION_TOL) -> bool:
    """True iff ``a`` majorizes ``b``.

    The shorter vector is padded with zeros. Every partial sum of the sorted
    ``a`` must dominate that of ``b`` (up to ``tol``) and the totals must agree.
    """
    a, b = _padded_desc(a, b)
    if a.size == 0:
        return True
    ca, cb = np.cumsum(a), np.cumsum(b)
    if abs(ca[-1] - cb[-1]) > tol:
        return False
    return bool(np.all(ca >= cb - tol))


def state_majorizes(rho1: QuantumState, rho2: QuantumState, tol: float = MAJORIZATION_TOL) -> bool:
    return majorizes(rho1.eigenvalues, rho2.eigenvalues, tol)


def lemma_bound(a, b, c) -> tuple[float, float]:
    """Return ``(b . c, a_sorted . c_sorted)``; the second dominates the
    first whenever ``a`` majorizes ``b``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if not a.size == b.size == c.size:
        raise ValueError(f"length mismatch: {a.size}, {b.size}, {c.size}")
    lhs = float(np.dot(b, c))
    rhs = float(np.dot(np.sort(a)[::-1], np.sort(c)[::-1]))
    return lhs, rhs


def random_doubly_stochastic(n: int, rng: np.random.Generator, terms: int = 4) -> np.ndarray:
    """Convex combination of random permutation matrices."""
    w = rng.dirichlet(np.ones(terms))
    out = np.zeros((n, n))
    for wi in w:
        out[np.arange(n), rng.permutation(n)] += wi
    return out
