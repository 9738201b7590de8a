"""Coefficient-level action of T(p), T~_j(p^2), T'_j(p^2) and T(p)^2.

An output coefficient at a class Lambda (Gram T on Z^n) is a sum over
lattices Omega between p Lambda and (1/p) Lambda (or Lambda for T(p)).
Writing Omega = (1/p) B Z^n, the Smith form B = P^-1 diag(d) Q^-1 has
every d_i in {1, p, p^2}; their multiplicities are mult(1/p), mult(1) and
mult(p) of {Lambda : Omega}, and the columns of P^-1 with d_i = p span
(Lambda cap Omega) / p (Lambda + Omega).  None of this depends on T, so
the frames are tabulated once per (n, p).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .fourier import FourierMap, InsufficientBound
from .fqspace import FqQuadSpace, phi_brute
from .gramclass import GramClass, canonicalize, class_inventory
from .intmat import smith, sublattices_between, unimodular_inverse
from .qanalog import beta, ppow

__all__ = [
    "DegreeTooLarge",
    "HeckeContext",
    "IntermediateLattice",
    "alpha_j",
    "apply_Tp",
    "apply_Tp_squared",
    "apply_Tprime",
    "apply_Ttilde",
    "enumerate_between",
    "enumerate_index_p",
    "exponent_Ej",
    "operator_identity_check",
    "u_coeff",
    "w_coeff",
]

MAX_DEGREE = 3


class DegreeTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class HeckeContext:
    """What the operators need to know about the source lattice at p."""

    k: int
    chi: int
    level: int
    p: int

    def __post_init__(self):
        if self.level % self.p == 0:
            raise ValueError(f"p = {self.p} divides the level {self.level}")
        if self.chi not in (1, -1):
            raise ValueError("chi(p) must be +1 or -1")

    @classmethod
    def for_lattice(cls, L, p: int) -> "HeckeContext":
        return cls(L.k, L.character_at(p), L.level, p)


@dataclass(frozen=True)
class IntermediateLattice:
    """Omega = (1/p) B Z^n (or B Z^n for the index-p family) in Lambda coordinates."""

    B: tuple
    mults: tuple  # (mult(1/p), mult(1), mult(p)) of {Lambda : Omega}
    quotient_basis: tuple  # columns spanning (Lambda cap Omega) / p(Lambda + Omega)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.B, dtype=np.int64)


def _frame(B, p: int, shift: int) -> IntermediateLattice:
    d, P, _ = smith(B)
    Pinv = unimodular_inverse(P)
    n = len(B)
    exps = []
    for x in d:
        e = 0
        while x % p == 0:
            x //= p
            e += 1
        exps.append(e - shift)
    mults = (exps.count(-1), exps.count(0), exps.count(1))
    if sum(mults) != n:
        raise AssertionError("unexpected invariant factor")
    qb = tuple(tuple(Pinv[r][i] for r in range(n)) for i in range(n) if exps[i] == 0)
    return IntermediateLattice(tuple(tuple(r) for r in B), mults, qb)


@lru_cache(maxsize=None)
def _between(n: int, p: int) -> tuple:
    return tuple(_frame(B, p, 1) for B in sublattices_between(p, n, 2))


@lru_cache(maxsize=None)
def _index_p(n: int, p: int) -> tuple:
    return tuple(_frame(B, p, 0) for B in sublattices_between(p, n, 1))


def _degree(x) -> int:
    n = x.n if isinstance(x, GramClass) else int(x)
    if n > MAX_DEGREE:
        raise DegreeTooLarge(f"degree {n} exceeds the enumeration guard {MAX_DEGREE}")
    return n


def enumerate_between(Lam, p: int) -> tuple:
    """All Omega with p Lambda <= Omega <= (1/p) Lambda (``Lam``: class or degree)."""
    return _between(_degree(Lam), p)


def enumerate_index_p(Lam, p: int) -> tuple:
    """All Omega with p Lambda <= Omega <= Lambda; here mults are (0, mult(1), mult(p))."""
    return _index_p(_degree(Lam), p)


def _scaled_gram(T: np.ndarray, B: np.ndarray, denom: int):
    """B^T T B / denom if it is even integral, else None."""
    G = B.T @ T @ B
    if (G % denom).any():
        return None
    G = G // denom
    if (np.diag(G) % 2).any():
        return None
    return G


def alpha_j(T, omega: IntermediateLattice, p: int, j: int) -> int:
    """Totally isotropic codimension-(n-j) subspaces of the quotient space."""
    T = np.array(T.rep if isinstance(T, GramClass) else T, dtype=np.int64)
    n = T.shape[0]
    dim = omega.mults[1]
    target = dim - (n - j)
    if target < 0:
        return 0
    if dim == 0:
        return 1
    U = np.array(omega.quotient_basis, dtype=np.int64).T
    return _phi_of_gram(tuple(map(tuple, (U.T @ T @ U).tolist())), p, target)


@lru_cache(maxsize=None)
def _phi_of_gram(G: tuple, p: int, ell: int) -> int:
    return phi_brute(FqQuadSpace.from_gram(G, p), ell)


def exponent_Ej(mults, k: int, n: int, j: int) -> int:
    m_inv, m_one, m_p = mults
    mj = m_one - n + j
    return k * (m_inv - m_p + j) + m_p * (m_p + m_one + 1) + mj * (mj + 1) // 2 - j * (n + 1)


def _target_bound(F: FourierMap, factor: int, bound: int | None) -> int:
    if bound is None:
        if F.trace_bound is None:
            raise ValueError("a lazy input map needs an explicit output bound")
        return F.trace_bound // factor
    if not F.covers(factor * bound):
        raise InsufficientBound(
            f"output bound {bound} needs input trace bound {factor * bound}, "
            f"but the map only covers {F.trace_bound}"
        )
    return bound


def _context(ctx, p: int) -> HeckeContext:
    if isinstance(ctx, HeckeContext):
        if ctx.p != p:
            raise ValueError("context prime differs from the operator prime")
        return ctx
    k, chi, level = ctx
    return HeckeContext(k, chi, level, p)


def ttilde_coefficient(F: FourierMap, T, ctx: HeckeContext, j: int) -> Fraction:
    p, k = ctx.p, ctx.k
    T = np.array(T.rep if isinstance(T, GramClass) else T, dtype=np.int64)
    n = T.shape[0]
    total = Fraction(0)
    for om in enumerate_between(n, p):
        G = _scaled_gram(T, om.matrix, p * p)
        if G is None:
            continue
        c = F.coeff(canonicalize(G))
        if c == 0:
            continue
        a = alpha_j(T, om, p, j)
        if a == 0:
            continue
        sign = ctx.chi ** ((j - n + om.mults[1]) % 2)
        total += sign * ppow(p, exponent_Ej(om.mults, k, n, j)) * a * c
    return total


def tp_coefficient(F: FourierMap, T, ctx: HeckeContext) -> Fraction:
    p, k = ctx.p, ctx.k
    T = np.array(T.rep if isinstance(T, GramClass) else T, dtype=np.int64)
    n = T.shape[0]
    total = Fraction(0)
    for om in enumerate_index_p(n, p):
        G = _scaled_gram(T, om.matrix, p)
        if G is None:
            continue
        c = F.coeff(canonicalize(G))
        if c == 0:
            continue
        m_one, m_p = om.mults[1], om.mults[2]
        E = m_one * k + m_p * (m_p + 1) // 2 - n * (n + 1) // 2
        total += ctx.chi ** (m_one % 2) * ppow(p, E) * c
    return total


def apply_Tp(F: FourierMap, ctx, p: int, bound: int | None = None) -> FourierMap:
    """theta | T(p), on every class of trace <= bound (default: input bound // p)."""
    ctx = _context(ctx, p)
    bound = _target_bound(F, p, bound)
    entries = {c: tp_coefficient(F, c, ctx) for c in class_inventory(F.n, bound)}
    return FourierMap(F.n, F.k, bound, entries, p_context=p)


def apply_Ttilde(F: FourierMap, ctx, p: int, j: int, bound: int | None = None) -> FourierMap:
    """theta | T~_j(p^2); j = 0 is the identity.

    For j > n the map is zero: alpha_j counts j-dimensional subspaces of a
    space of dimension at most n.
    """
    ctx = _context(ctx, p)
    if j < 0:
        raise ValueError("j must be nonnegative")
    bound = _target_bound(F, p * p, bound)
    classes = class_inventory(F.n, bound)
    if j > F.n:
        entries = {}
    elif j == 0:
        entries = {c: F.coeff(c) for c in classes}
    else:
        entries = {c: ttilde_coefficient(F, c, ctx, j) for c in classes}
    return FourierMap(F.n, F.k, bound, entries, p_context=p)


def u_coeff(p: int, n: int, j: int, q: int) -> Fraction:
    return (-1) ** q * ppow(p, q * (q - 1) // 2) * beta(p, n - j + q, q)


def apply_Tprime(F: FourierMap, ctx, p: int, j: int, bound: int | None = None) -> FourierMap:
    """theta | T'_j(p^2) = sum_q u_q(j) theta | T~_{j-q}(p^2)."""
    ctx = _context(ctx, p)
    bound = _target_bound(F, p * p, bound)
    terms = [(u_coeff(p, F.n, j, q), apply_Ttilde(F, ctx, p, j - q, bound)) for q in range(j + 1)]
    out = FourierMap.linear_combination(terms, F.n, F.k, bound)
    out.p_context = p
    return out


def apply_Tp_squared(F: FourierMap, ctx, p: int, bound: int | None = None, route: str = "twice",
                     sign: str = "alternating") -> FourierMap:
    """theta | T(p)^2.

    ``route="twice"`` applies T(p) two times.  ``route="expansion"`` uses
    sum_j s_j p^(k(n-j) + j(j+1)/2 - n(n+1)/2) T~_j(p^2) with
    s_j = (-1)^(n-j) (``sign="alternating"``) or chi(p)^(n-j) (``sign="chi"``).
    """
    ctx = _context(ctx, p)
    bound = _target_bound(F, p * p, bound)
    n, k = F.n, ctx.k
    if route == "twice":
        mid = apply_Tp(F, ctx, p, p * bound)
        return apply_Tp(mid, ctx, p, bound)
    if route != "expansion":
        raise ValueError("route must be 'twice' or 'expansion'")
    if sign not in ("alternating", "chi"):
        raise ValueError("sign must be 'alternating' or 'chi'")
    base = -1 if sign == "alternating" else ctx.chi
    terms = []
    for j in range(n + 1):
        c = base ** (n - j) * ppow(p, k * (n - j) + j * (j + 1) // 2 - n * (n + 1) // 2)
        terms.append((c, apply_Ttilde(F, ctx, p, j, bound)))
    out = FourierMap.linear_combination(terms, n, F.k, bound)
    out.p_context = p
    return out


def w_coeff(p: int, n: int, k: int, a: int, q: int, chi: int) -> Fraction:
    shift = 0 if chi == 1 else 1
    return (-1) ** q * ppow(p, q * (q + 1) // 2) * beta(p, a + q - 1, q) * beta(p, n - k + shift + q, a + q)


def operator_identity_check(which: str, F: FourierMap, ctx, p: int, bound: int, index: int):
    """Both sides of an operator identity applied to F, truncated at ``bound``.

    ``which="prop31"``: index is a, comparing T~_{k0+a} with sum_q w_q(a) T~_{k0-q},
    where k0 = k (chi = +1) or k - 1 (chi = -1); T~ with negative index is zero.
    ``which="prop32"``: index is r, comparing T~_r with sum_q beta(n-q, r-q) T'_q.
    Returns ``(lhs, rhs)``.
    """
    ctx = _context(ctx, p)
    n, k = F.n, ctx.k
    if which == "prop31":
        a = index
        k0 = k if ctx.chi == 1 else k - 1
        if not 0 <= k0 + a <= n:
            raise ValueError(f"T~ index {k0 + a} outside [0, {n}]")
        lhs = apply_Ttilde(F, ctx, p, k0 + a, bound)
        terms = []
        for q in range(k + 1):
            idx = k0 - q
            if idx < 0 or idx > n:
                continue
            terms.append((w_coeff(p, n, k, a, q, ctx.chi), apply_Ttilde(F, ctx, p, idx, bound)))
        rhs = FourierMap.linear_combination(terms, n, F.k, bound)
        return lhs, rhs
    if which == "prop32":
        r = index
        lhs = apply_Ttilde(F, ctx, p, r, bound)
        terms = [(beta(p, n - q, r - q), apply_Tprime(F, ctx, p, q, bound)) for q in range(r + 1)]
        rhs = FourierMap.linear_combination(terms, n, F.k, bound)
        return lhs, rhs
    raise ValueError("which must be 'prop31' or 'prop32'")
