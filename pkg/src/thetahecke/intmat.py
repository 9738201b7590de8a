"""Exact integer and rational matrix helpers.

Matrices are lists of lists of Python ints (or Fractions); sizes here are
tiny, so clarity beats vectorization.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm

__all__ = [
    "det",
    "hnf_columns",
    "identity",
    "kernel_split",
    "matmul",
    "rational_inverse",
    "smith",
    "sublattices_between",
    "transpose",
    "unimodular_inverse",
]


def identity(n: int):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(a):
    return [list(r) for r in zip(*a)] if a else []


def matmul(a, b):
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def to_int_rows(a):
    return [[int(x) for x in row] for row in a]


def det(a) -> Fraction:
    """Determinant by fraction-exact elimination."""
    m = [[Fraction(x) for x in row] for row in a]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return d


def rational_inverse(a):
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        m[c], m[piv] = m[piv], m[c]
        f = m[c][c]
        m[c] = [x / f for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                g = m[r][c]
                m[r] = [x - g * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def unimodular_inverse(u):
    inv = rational_inverse(u)
    if any(x.denominator != 1 for row in inv for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in inv]


def smith(a):
    """Smith form with transforms: returns ``(d, P, Q)`` with ``P a Q = diag(d)``.

    ``a`` is square; ``P`` and ``Q`` are unimodular and ``d`` is a list of
    nonnegative invariant factors with d[i] | d[i+1] (zeros last).
    """
    n = len(a)
    m = to_int_rows(a)
    P = identity(n)
    Q = identity(n)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        P[i], P[j] = P[j], P[i]

    def swap_cols(i, j):
        for M in (m, Q):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):  # row_dst += f * row_src
        m[dst] = [x + f * y for x, y in zip(m[dst], m[src])]
        P[dst] = [x + f * y for x, y in zip(P[dst], P[src])]

    def add_col(dst, src, f):
        for M in (m, Q):
            for row in M:
                row[dst] += f * row[src]

    for t in range(n):
        nz = [(abs(m[i][j]), i, j) for i in range(t, n) for j in range(t, n) if m[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, n):
                if m[i][t]:
                    f = m[i][t] // m[t][t]
                    add_row(i, t, -f)
                    if m[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, n):
                if m[t][j]:
                    f = m[t][j] // m[t][t]
                    add_col(j, t, -f)
                    if m[t][j]:
                        swap_cols(t, j)
                        done = False
            if not done:
                continue
            # enforce divisibility of the remaining block
            bad = next(
                ((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if m[i][j] % m[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            P[t] = [-x for x in P[t]]
    return [m[i][i] for i in range(n)], P, Q


def hnf_columns(gens):
    """Canonical (upper-triangular Hermite) basis of the Z-span of columns.

    ``gens`` is an n x k integer matrix of full row rank n.  The result is
    the unique n x n upper-triangular H with positive diagonal and entries
    to the right of each diagonal entry reduced into [0, diagonal).
    """
    n = len(gens)
    cols = [list(c) for c in zip(*gens)]
    basis = []
    # work on rows of the transposed matrix, bottom coordinate first
    for r in range(n - 1, -1, -1):
        live = [c for c in cols if c[r]]
        rest = [c for c in cols if not c[r]]
        while len(live) > 1:
            live.sort(key=lambda c: abs(c[r]))
            piv = live[0]
            nxt = [piv]
            for c in live[1:]:
                f = c[r] // piv[r]
                c = [x - f * y for x, y in zip(c, piv)]
                (nxt if c[r] else rest).append(c)
            live = nxt
        if not live:
            raise ValueError("generators do not span a full-rank lattice")
        piv = live[0]
        if piv[r] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        cols = rest
    basis.reverse()  # basis[i] has last nonzero coordinate i
    H = [[basis[j][i] for j in range(n)] for i in range(n)]
    # reduce entries above each diagonal entry, column by column
    for j in range(n):
        for i in range(j - 1, -1, -1):
            f = H[i][j] // H[i][i]
            if f:
                for k in range(n):
                    H[k][j] -= f * H[k][i]
    return H


def kernel_split(t):
    """Unimodular U with ``t U = [H | 0]``, H of full column rank.

    Returns ``(U, rank)``; the last ``n - rank`` columns of U span the
    integer kernel of ``t``.
    """
    n = len(t)
    m = to_int_rows(t)
    U = identity(n)
    rank = 0
    for r in range(n):
        if rank == n:
            break
        while True:
            nz = [j for j in range(rank, n) if m[r][j]]
            if not nz:
                break
            j0 = min(nz, key=lambda j: abs(m[r][j]))
            for M in (m, U):
                for row in M:
                    row[rank], row[j0] = row[j0], row[rank]
            done = True
            for j in range(rank + 1, n):
                if m[r][j]:
                    f = m[r][j] // m[r][rank]
                    for M in (m, U):
                        for row in M:
                            row[j] -= f * row[rank]
                    if m[r][j]:
                        done = False
            if done:
                rank += 1
                break
    return U, rank


@lru_cache(maxsize=None)
def sublattices_between(p: int, n: int, e: int):
    """All lattices M with p^e Z^n <= M <= Z^n, as column-HNF basis tuples."""
    q = p**e
    divisors = [p**i for i in range(e + 1)]
    out = []
    for diag in itertools.product(divisors, repeat=n):
        slots = [(i, j) for j in range(n) for i in range(j)]
        ranges = [range(diag[i]) for i, _ in slots]
        for vals in itertools.product(*ranges):
            B = [[0] * n for _ in range(n)]
            for k in range(n):
                B[k][k] = diag[k]
            for (i, j), v in zip(slots, vals):
                B[i][j] = v
            # p^e Z^n is inside iff p^e B^{-1} is integral
            inv = rational_inverse(B)
            if all((q * x).denominator == 1 for row in inv for x in row):
                out.append(tuple(tuple(r) for r in B))
    return tuple(out)


def content(vals) -> int:
    g = 0
    for v in vals:
        g = gcd(g, int(v))
    return g


def common_denominator(mat) -> int:
    d = 1
    for row in mat:
        for x in row:
            d = lcm(d, Fraction(x).denominator)
    return d
