"""Small dense linear algebra over F_p on integer numpy arrays."""
from __future__ import annotations

import numpy as np


def rref(mat, p: int):
    """Reduced row echelon form mod p; returns (R, pivot_columns)."""
    a = np.array(mat, dtype=np.int64) % p
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, p) % p
        others = np.nonzero(a[:, c])[0]
        for i in others:
            if i != r:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(mat, p: int) -> int:
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0
    return len(rref(mat, p)[1])


def nullspace(mat, p: int) -> np.ndarray:
    """Basis (as rows) of {x : mat @ x == 0 mod p}."""
    mat = np.asarray(mat, dtype=np.int64)
    cols = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    r, pivots = rref(mat, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-r[i, f]) % p
        basis.append(v)
    if not basis:
        return np.zeros((0, cols), dtype=np.int64)
    return np.array(basis)


def extend_to_basis(rows, dim: int, p: int) -> np.ndarray:
    """Standard basis vectors completing independent ``rows`` to a basis."""
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, dim)
    _, pivots = rref(rows, p) if len(rows) else (None, [])
    extra = [c for c in range(dim) if c not in pivots]
    out = np.zeros((len(extra), dim), dtype=np.int64)
    for i, c in enumerate(extra):
        out[i, c] = 1
    return out


def solve_coords(basis, vecs, p: int) -> np.ndarray:
    """Coordinates of each row of ``vecs`` in the row basis ``basis`` (mod p)."""
    basis = np.asarray(basis, dtype=np.int64)
    vecs = np.asarray(vecs, dtype=np.int64).reshape(-1, basis.shape[1])
    k = basis.shape[0]
    aug = np.hstack([basis.T, vecs.T]) % p
    r, pivots = rref(aug, p)
    if any(c >= k for c in pivots):
        raise ValueError("vector not in span")
    out = np.zeros((vecs.shape[0], k), dtype=np.int64)
    for i, c in enumerate(pivots):
        out[:, c] = r[i, k:]
    return out
