"""Exact enumeration of lattice vectors of bounded norm.

With d_i the leading principal minors of A (d_0 = 1) one has

    x^T A x = sum_i y_i^2 / (d_i d_{i+1}),   y_i = d_{i+1} x_i + sum_{j>i} m_ij x_j,

where the m_ij are integer minors.  Scaling by a common multiple W of the
d_i d_{i+1} turns every pruning test into an integer comparison, so the
search never loses vectors to rounding.  Coordinates are fixed from the
last one down, one level at a time, with numpy carrying all partial
vectors of a level at once.
"""
from __future__ import annotations

from functools import lru_cache
from math import lcm

import numpy as np

from .intmat import det

__all__ = ["short_vectors", "isqrt_array"]


def isqrt_array(v: np.ndarray) -> np.ndarray:
    """Exact floor square roots of a nonnegative int64 array."""
    s = np.floor(np.sqrt(v.astype(np.float64))).astype(np.int64)
    s = np.maximum(s, 0)
    while True:
        over = s * s > v
        if not over.any():
            break
        s[over] -= 1
    while True:
        under = (s + 1) * (s + 1) <= v
        if not under.any():
            break
        s[under] += 1
    return s


@lru_cache(maxsize=None)
def _schur_data(gram: tuple):
    n = len(gram)
    minors = [1] + [int(det([row[:i] for row in gram[:i]])) for i in range(1, n + 1)]
    if any(m <= 0 for m in minors[1:]):
        raise ValueError("Gram matrix is not positive definite")
    # m[i][j] for j > i: determinant of rows 0..i, columns 0..i-1 plus column j
    m = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            sub = [[gram[r][c] for c in list(range(i)) + [j]] for r in range(i + 1)]
            m[i, j] = int(det(sub))
    W = 1
    for i in range(n):
        W = lcm(W, minors[i] * minors[i + 1])
    weights = [W // (minors[i] * minors[i + 1]) for i in range(n)]
    return tuple(minors), m, W, tuple(weights)


def short_vectors(gram, bound: int) -> np.ndarray:
    """All integer x with x^T A x <= bound (zero included), as rows."""
    g = tuple(tuple(int(v) for v in row) for row in gram)
    n = len(g)
    if bound < 0:
        return np.zeros((0, n), dtype=np.int64)
    minors, m, W, weights = _schur_data(g)
    if W * bound > 2**62:
        raise OverflowError("norm bound too large for exact int64 enumeration")
    # partial states: coordinates fixed so far and the remaining budget
    xs = np.zeros((1, n), dtype=np.int64)
    budget = np.array([W * bound], dtype=np.int64)
    for i in range(n - 1, -1, -1):
        c = xs[:, i + 1 :] @ m[i, i + 1 :] if i + 1 < n else np.zeros(len(xs), dtype=np.int64)
        s = isqrt_array(budget // weights[i])
        d = minors[i + 1]
        lo = -((s + c) // d)  # ceil((-s - c) / d)
        hi = (s - c) // d
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        if total == 0:
            return np.zeros((0, n), dtype=np.int64)
        idx = np.repeat(np.arange(len(xs)), cnt)
        start = np.repeat(lo, cnt)
        offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        xi = start + offs
        xs = xs[idx].copy()
        xs[:, i] = xi
        y = d * xi + c[idx]
        budget = budget[idx] - weights[i] * y * y
    return xs
