"""GL_n(Z)-classes of even positive semidefinite Gram matrices.

The canonical representative of a definite form is the lexicographically
least Gram matrix among all bases b_1, ..., b_r built greedily: b_i has the
smallest norm among vectors extending b_1, ..., b_{i-1} to a primitive
system.  For rank at most 4 such bases realize the successive minima, so
the diagonal is the sequence of minima and the trace is the least trace
over all bases of the class.  Singular forms are stored as ``diag(T0, 0)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .intmat import kernel_split, matmul, smith, transpose
from .shortvec import short_vectors

__all__ = ["GramClass", "aut_order", "canonicalize", "class_inventory", "is_even_psd"]

MAX_CANONICAL_RANK = 4


def _as_tuple(t) -> tuple:
    return tuple(tuple(int(x) for x in row) for row in t)


@dataclass(frozen=True, order=True)
class GramClass:
    """Canonical representative ``rep`` of degree ``n``; ordered by (trace, rep)."""

    trace: int
    rep: tuple
    n: int = field(compare=False)
    rank: int = field(compare=False)

    @property
    def aut_order(self) -> int:
        return aut_order(self.definite_part()) if self.rank else 1

    def definite_part(self) -> tuple:
        return tuple(row[: self.rank] for row in self.rep[: self.rank])

    def matrix(self) -> np.ndarray:
        return np.array(self.rep, dtype=np.int64).reshape(self.n, self.n)

    def __repr__(self):
        return f"GramClass({[list(r) for r in self.rep]})"


def is_even_psd(t) -> bool:
    a = np.array(t, dtype=object)
    n = a.shape[0]
    if a.shape != (n, n) or (a != a.T).any():
        return False
    if any(a[i, i] % 2 for i in range(n)):
        return False
    if n == 0:
        return True
    return bool(np.all(np.linalg.eigvalsh(a.astype(float)) > -1e-9))


def _primitive(cols) -> bool:
    """Do the integer columns extend to a basis of Z^r?"""
    r = len(cols[0])
    k = len(cols)
    sq = [[cols[j][i] if j < k else 0 for j in range(r)] for i in range(r)]
    d, _, _ = smith(sq)
    return all(x == 1 for x in d[:k])


class _BoundTooSmall(Exception):
    pass


def _greedy_bases(gram: tuple):
    """All greedy successive-minimum bases of a definite form (coordinate rows)."""
    bound = max(row[i] for i, row in enumerate(gram))
    while True:
        try:
            return _greedy_bases_within(gram, bound)
        except _BoundTooSmall:
            bound *= 2


def _greedy_bases_within(gram: tuple, bound: int):
    r = len(gram)
    A = np.array(gram, dtype=np.int64)
    vecs = short_vectors(gram, bound)
    norms = np.einsum("ij,jk,ik->i", vecs, A, vecs)
    order = np.lexsort((np.arange(len(vecs)), norms))
    vecs, norms = vecs[order], norms[order]
    nonzero = norms > 0
    vecs, norms = vecs[nonzero], norms[nonzero]

    results = []

    def extend(chosen):
        if len(chosen) == r:
            results.append(list(chosen))
            return
        best = None
        for v, nv in zip(vecs, norms):
            if best is not None and nv > best:
                break
            if _primitive([list(map(int, c)) for c in chosen] + [list(map(int, v))]):
                best = nv
                extend(chosen + [v])
        if best is None:
            raise _BoundTooSmall

    extend([])
    return results


@lru_cache(maxsize=None)
def _canonical_definite(gram: tuple) -> tuple:
    r = len(gram)
    if r > MAX_CANONICAL_RANK:
        raise ValueError("canonical forms are only implemented up to rank 4")
    A = np.array(gram, dtype=np.int64)
    best = None
    for basis in _greedy_bases(gram):
        Bm = np.array(basis, dtype=np.int64)
        G = Bm @ A @ Bm.T
        key = tuple(G[i, j] for i in range(r) for j in range(i, r))
        if best is None or key < best[0]:
            best = (key, G)
    return _as_tuple(best[1])


def _reduce_pair(g):
    """Cheap pairwise size reduction, only to improve memo hits."""
    g = [list(row) for row in g]
    r = len(g)
    changed = True
    while changed:
        changed = False
        for i in range(r):
            for j in range(r):
                if i == j or g[i][i] == 0:
                    continue
                # b_j -> b_j - f b_i with f the nearest integer to g_ij / g_ii
                f = (2 * g[i][j] + g[i][i]) // (2 * g[i][i])
                if f and g[j][j] - 2 * f * g[i][j] + f * f * g[i][i] < g[j][j]:
                    for k in range(r):
                        g[k][j] -= f * g[k][i]
                    for k in range(r):
                        g[j][k] -= f * g[i][k]
                    changed = True
    return _as_tuple(g)


@lru_cache(maxsize=200000)
def _canonicalize_tuple(t: tuple) -> GramClass:
    n = len(t)
    if n == 0:
        return GramClass(0, (), 0, 0)
    U, rank = kernel_split(t)
    TU = matmul(matmul(transpose(U), [list(r) for r in t]), U)
    t0 = _reduce_pair([row[:rank] for row in TU[:rank]])
    c0 = _canonical_definite(t0) if rank else ()
    rep = [[0] * n for _ in range(n)]
    for i in range(rank):
        for j in range(rank):
            rep[i][j] = c0[i][j]
    rep = _as_tuple(rep)
    return GramClass(sum(rep[i][i] for i in range(n)), rep, n, rank)


def canonicalize(t) -> GramClass:
    """Canonical class of an even positive semidefinite integer matrix."""
    return _canonicalize_tuple(_as_tuple(t))


@lru_cache(maxsize=None)
def _aut_order(gram: tuple) -> int:
    r = len(gram)
    A = np.array(gram, dtype=np.int64)
    vecs = short_vectors(gram, max(gram[i][i] for i in range(r)))
    norms = np.einsum("ij,jk,ik->i", vecs, A, vecs)
    cands = [vecs[norms == gram[i][i]] for i in range(r)]
    count = 0

    def rec(i, chosen):
        nonlocal count
        if i == r:
            count += 1
            return
        c = cands[i]
        ok = np.ones(len(c), dtype=bool)
        for j, w in enumerate(chosen):
            ok &= (c @ A @ w) == gram[j][i]
        for v in c[ok]:
            rec(i + 1, chosen + [v])

    rec(0, [])
    return count


def aut_order(t) -> int:
    """Order of the integral orthogonal group of a positive definite form."""
    g = _as_tuple(t)
    if not g:
        return 1
    return _aut_order(g)


@lru_cache(maxsize=None)
def _definite_inventory(r: int, bound: int) -> tuple:
    if r == 0:
        return ((),)
    found = set()
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]

    def diags(i, lo, remaining):
        if i == r:
            yield ()
            return
        for a in range(lo, remaining // (r - i) + 1, 2):
            for rest in diags(i + 1, a, remaining - a):
                yield (a,) + rest

    for diag in diags(0, 2, bound):
        ranges = [range(-(diag[i] // 2), diag[i] // 2 + 1) for i, _ in pairs]
        for off in itertools.product(*ranges):
            g = [[0] * r for _ in range(r)]
            for i in range(r):
                g[i][i] = diag[i]
            for (i, j), v in zip(pairs, off):
                g[i][j] = g[j][i] = v
            minors_ok = all(
                np.linalg.det(np.array(g, dtype=float)[:k, :k]) > 0.5 for k in range(2, r + 1)
            )
            if not minors_ok:
                continue
            found.add(_canonical_definite(_as_tuple(g)))
    return tuple(sorted(found, key=lambda g: (sum(g[i][i] for i in range(r)), g)))


def class_inventory(n: int, bound: int) -> list:
    """Every class of degree n (singular ones included) with trace <= bound, sorted."""
    out = []
    for r in range(n + 1):
        for c0 in _definite_inventory(r, bound):
            rep = [[0] * n for _ in range(n)]
            for i in range(r):
                for j in range(r):
                    rep[i][j] = c0[i][j]
            out.append(canonicalize(rep))
    return sorted(set(out))
