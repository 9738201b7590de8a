"""Even positive definite integral lattices and their Siegel theta series."""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from math import lcm
from pathlib import Path

import numpy as np

from .fourier import FourierMap
from .fqspace import FqQuadSpace, Residual, decompose, is_prime
from .gramclass import GramClass, canonicalize, class_inventory, is_even_psd
from .intmat import det, rational_inverse
from .shortvec import short_vectors

__all__ = [
    "DividesLevel",
    "IntegralLattice",
    "character_at",
    "count_representations",
    "level",
    "mod_p_space",
    "read_matrix_file",
    "theta_coefficients",
    "theta_series",
]


class DividesLevel(ValueError):
    """The prime divides the level, so the character is not defined there."""


class IntegralLattice:
    """Lattice Z^rank with an even, positive definite Gram matrix."""

    def __init__(self, gram, name: str | None = None):
        g = tuple(tuple(int(x) for x in row) for row in gram)
        n = len(g)
        if n == 0 or any(len(row) != n for row in g):
            raise ValueError("Gram matrix must be square and nonempty")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("Gram matrix must be symmetric")
        if any(g[i][i] % 2 for i in range(n)):
            raise ValueError("Gram matrix must have even diagonal")
        if any(det([row[:i] for row in g[:i]]) <= 0 for i in range(1, n + 1)):
            raise ValueError("Gram matrix must be positive definite")
        self.gram = g
        self.name = name
        self._vecs = np.zeros((0, n), dtype=np.int64)
        self._norms = np.zeros(0, dtype=np.int64)
        self._vec_bound = -1
        self._by_norm: dict[int, np.ndarray] = {}

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def k(self) -> int:
        """Half the rank; the weight of the theta series."""
        return self.rank // 2

    def matrix(self) -> np.ndarray:
        return np.array(self.gram, dtype=np.int64)

    @cached_property
    def discriminant(self) -> int:
        return int(det(self.gram))

    @cached_property
    def level(self) -> int:
        inv = rational_inverse(self.gram)
        n = self.rank
        N = 1
        for i in range(n):
            for j in range(n):
                N = lcm(N, inv[i][j].denominator)
            N = lcm(N, (inv[i][i] / 2).denominator)
        return N

    def __repr__(self):
        return f"IntegralLattice({self.name or [list(r) for r in self.gram]})"

    def __eq__(self, other):
        return isinstance(other, IntegralLattice) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    # ------------------------------------------------------------ reduction mod p

    def mod_p_space(self, p: int) -> FqQuadSpace:
        return FqQuadSpace.from_gram(self.gram, p)

    def character_at(self, p: int) -> int:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if self.level % p == 0:
            raise DividesLevel(f"p = {p} divides the level {self.level}")
        wd = decompose(self.mod_p_space(p))
        return 1 if wd.hyp_count == self.k and wd.residual is Residual.ZERO else -1

    # ------------------------------------------------------------ vectors

    def vectors_up_to(self, bound: int) -> None:
        """Make sure every vector of norm <= bound is cached."""
        if bound <= self._vec_bound:
            return
        bound = max(bound, 2 * self._vec_bound)
        vecs = short_vectors(self.gram, bound)
        A = self.matrix()
        norms = np.einsum("ij,jk,ik->i", vecs, A, vecs)
        order = np.lexsort(tuple(vecs.T[::-1]) + (norms,))
        self._vecs, self._norms = vecs[order], norms[order]
        self._vec_bound = bound
        self._by_norm = {}

    def vectors_of_norm(self, m: int) -> np.ndarray:
        if m < 0:
            return np.zeros((0, self.rank), dtype=np.int64)
        self.vectors_up_to(m)
        if m not in self._by_norm:
            lo, hi = np.searchsorted(self._norms, [m, m + 1])
            self._by_norm[m] = self._vecs[lo:hi]
        return self._by_norm[m]

    def count_representations(self, T) -> int:
        """#{C in Z^(rank x n) : C^T A C = T}, column by column."""
        T = np.array(T, dtype=np.int64)
        n = T.shape[0]
        if n == 0:
            return 1
        A = self.matrix()
        cands = [self.vectors_of_norm(int(T[i, i])) for i in range(n)]
        if any(len(c) == 0 for c in cands):
            return 0
        images = [c @ A for c in cands]

        def rec(i, allowed):
            # allowed[m]: candidate mask for column m >= i given columns < i
            if i == n - 1:
                return int(allowed[i].sum())
            if i == n - 2:
                a = cands[i][allowed[i]]
                b = cands[i + 1][allowed[i + 1]]
                if len(a) == 0 or len(b) == 0:
                    return 0
                return int(((a @ A) @ b.T == T[i, i + 1]).sum())
            total = 0
            for idx in np.nonzero(allowed[i])[0]:
                v = cands[i][idx]
                nxt = list(allowed)
                for m in range(i + 1, n):
                    nxt[m] = allowed[m] & (images[m] @ v == T[i, m])
                total += rec(i + 1, nxt)
            return total

        return rec(0, [np.ones(len(c), dtype=bool) for c in cands])

    def representations(self, T) -> np.ndarray:
        """Every C with C^T A C = T, stacked as an array of shape (count, rank, n)."""
        T = np.array(T, dtype=np.int64)
        n = T.shape[0]
        if n == 0:
            return np.zeros((1, self.rank, 0), dtype=np.int64)
        A = self.matrix()
        cands = [self.vectors_of_norm(int(T[i, i])) for i in range(n)]
        if any(len(c) == 0 for c in cands):
            return np.zeros((0, self.rank, n), dtype=np.int64)
        images = [c @ A for c in cands]
        found = []

        def rec(i, chosen, allowed):
            if i == n - 1:
                for v in cands[i][allowed[i]]:
                    found.append(chosen + [v])
                return
            for idx in np.nonzero(allowed[i])[0]:
                v = cands[i][idx]
                nxt = list(allowed)
                for m in range(i + 1, n):
                    nxt[m] = allowed[m] & (images[m] @ v == T[i, m])
                rec(i + 1, chosen + [v], nxt)

        rec(0, [], [np.ones(len(c), dtype=bool) for c in cands])
        if not found:
            return np.zeros((0, self.rank, n), dtype=np.int64)
        return np.array(found, dtype=np.int64).transpose(0, 2, 1)


def level(L: IntegralLattice) -> int:
    return L.level


def character_at(L: IntegralLattice, p: int) -> int:
    return L.character_at(p)


def mod_p_space(L: IntegralLattice, p: int) -> FqQuadSpace:
    return L.mod_p_space(p)


def count_representations(L: IntegralLattice, T, n: int | None = None) -> int:
    T = np.array(T, dtype=np.int64)
    if n is not None and T.shape != (n, n):
        raise ValueError(f"T must be {n} x {n}")
    return L.count_representations(T)


def theta_series(L: IntegralLattice, n: int) -> FourierMap:
    """Lazy theta series of degree n: coefficients computed on demand."""
    if n < 1:
        raise ValueError("degree must be positive")

    def source(cls: GramClass) -> Fraction:
        return Fraction(L.count_representations(cls.rep))

    return FourierMap(n=n, k=L.k, trace_bound=None, source=source)


def theta_coefficients(L: IntegralLattice, n: int, bound: int) -> FourierMap:
    """Materialized theta coefficients on every class with trace <= bound."""
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    entries = {}
    for cls in class_inventory(n, bound):
        entries[cls] = Fraction(L.count_representations(cls.rep))
    return FourierMap(n=n, k=L.k, trace_bound=bound, entries=entries)


def read_matrix_file(path) -> list:
    """Matrix file: first line the size n, then n rows of integers."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        n = int(lines[0][0])
        if len(lines[0]) != 1 or n <= 0:
            raise ValueError
        rows = [[int(x) for x in ln] for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed matrix file {path}") from exc
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"matrix file {path} does not hold an {n} x {n} matrix")
    if not is_even_psd(rows):
        raise ValueError(f"matrix in {path} is not even symmetric positive semidefinite")
    return rows
