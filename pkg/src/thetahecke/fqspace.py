"""Quadratic spaces over prime fields, characteristic 2 included.

A space is stored as the upper-triangular coefficient matrix ``c`` of the
polynomial ``q(x) = sum_{i<=j} c[i, j] x_i x_j`` over F_p.  The polar form
``b(x, y) = q(x + y) - q(x) - q(y)`` is what every orthogonality test in this
module uses; for odd p it is twice the bilinear form with ``B(x, x) = q(x)``,
for p = 2 it *is* the bilinear form and ``b(x, x) = 0``.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numba import njit

from . import modp
from .qanalog import beta, delta, ppow

__all__ = [
    "AnisotropicSpace",
    "FqQuadSpace",
    "NotRegular",
    "OddDimension",
    "Residual",
    "Subspace",
    "TooLarge",
    "UndefinedComposition",
    "WittDecomposition",
    "aniso_plane",
    "complement_class",
    "compose_class",
    "decompose",
    "find_isotropic",
    "hyperbolic_mate",
    "hyperbolic_space",
    "is_prime",
    "line_space",
    "orthogonal_complement",
    "orthogonal_sum",
    "phi_brute",
    "phi_general",
    "phi_regular",
    "plane_normal_basis",
    "radical",
    "reduction_rhs",
    "space_from_class",
    "split_anisotropic_vector",
    "totally_isotropic_subspaces",
    "witt_basis",
    "zero_space",
]

PHI_BRUTE_LIMIT = 10**7


class AnisotropicSpace(ValueError):
    """No nonzero isotropic vector exists."""


class TooLarge(ValueError):
    """Exhaustive enumeration would exceed the configured limit."""


class NotRegular(ValueError):
    pass


class OddDimension(ValueError):
    pass


class UndefinedComposition(ValueError):
    """A formal sum with negative hyperbolic exponent has no meaning here."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p**0.5) + 1))


class Residual(enum.Enum):
    ZERO = 0
    LINE = 1
    ANISO_PLANE = 2

    @property
    def dim(self) -> int:
        return self.value


@dataclass(frozen=True)
class WittDecomposition:
    """Isometry type ``rad^r + H^t + W`` with W anisotropic of dim 0, 1 or 2."""

    rad_dim: int
    hyp_count: int
    residual: Residual

    def __post_init__(self):
        if self.rad_dim < 0 or self.hyp_count < 0:
            raise ValueError("negative dimension in WittDecomposition")

    @property
    def dim(self) -> int:
        return self.rad_dim + 2 * self.hyp_count + self.residual.dim

    @property
    def regular(self) -> bool:
        return self.rad_dim == 0

    @property
    def hyperbolic(self) -> bool:
        return self.rad_dim == 0 and self.residual is Residual.ZERO

    def regular_part(self) -> "WittDecomposition":
        return WittDecomposition(0, self.hyp_count, self.residual)

    def as_tuple(self):
        return (self.rad_dim, self.hyp_count, self.residual.name)


class FqQuadSpace:
    """Quadratic space (F_p^dim, q) given by upper-triangular coefficients."""

    __slots__ = ("p", "coeffs", "_key")

    def __init__(self, p: int, coeffs):
        if not is_prime(p):
            raise ValueError(f"p must be prime, got {p}")
        c = np.array(coeffs, dtype=np.int64)
        if c.size == 0:
            c = np.zeros((0, 0), dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("coefficient matrix must be square")
        # fold the lower triangle into the upper one
        c = np.triu(c) + np.triu(c.T, 1)
        c %= p
        c.setflags(write=False)
        self.p = p
        self.coeffs = c
        self._key = (p, c.shape[0], c.tobytes())

    @classmethod
    def from_gram(cls, gram, p: int) -> "FqQuadSpace":
        """Reduce an even integral Gram matrix: Q mod p, or Q/2 mod 2 when p = 2."""
        a = np.array(gram, dtype=object)
        n = a.shape[0]
        c = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            if p == 2:
                if a[i, i] % 2:
                    raise ValueError("Gram matrix must have even diagonal")
                c[i, i] = (a[i, i] // 2) % 2
            else:
                c[i, i] = a[i, i] % p
            for j in range(i + 1, n):
                c[i, j] = (a[i, j] % p) if p == 2 else (2 * a[i, j]) % p
        return cls(p, c)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    def __eq__(self, other):
        return isinstance(other, FqQuadSpace) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"FqQuadSpace(p={self.p}, coeffs={self.coeffs.tolist()})"

    def polar_matrix(self) -> np.ndarray:
        return (self.coeffs + self.coeffs.T) % self.p

    def q(self, x) -> np.ndarray:
        """Evaluate q on one vector or on the rows of a 2-d array."""
        x = np.asarray(x, dtype=np.int64)
        single = x.ndim == 1
        x = x.reshape(-1, self.dim) % self.p
        out = np.einsum("ni,ij,nj->n", x, self.coeffs, x) % self.p
        return int(out[0]) if single else out

    def polar(self, x, y) -> int:
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        return int(x @ self.polar_matrix() @ y % self.p)

    def restrict(self, basis) -> "FqQuadSpace":
        """Induced form on the span of the rows of ``basis``, in that basis."""
        b = np.asarray(basis, dtype=np.int64).reshape(-1, self.dim)
        m = b.shape[0]
        if m == 0:
            return FqQuadSpace(self.p, np.zeros((0, 0), dtype=np.int64))
        pol = b @ self.polar_matrix() @ b.T % self.p
        c = np.triu(pol, 1)
        c[np.diag_indices(m)] = self.q(b)
        return FqQuadSpace(self.p, c)

    def full(self) -> "Subspace":
        return Subspace(self, np.eye(self.dim, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class Subspace:
    ambient: FqQuadSpace
    basis: np.ndarray

    def __post_init__(self):
        dim = self.ambient.dim
        b = np.asarray(self.basis, dtype=np.int64)
        b = b.reshape(-1, dim) % self.ambient.p if dim else np.zeros((0, 0), dtype=np.int64)
        if b.shape[0] and modp.rank(b, self.ambient.p) != b.shape[0]:
            raise ValueError("basis vectors are not linearly independent")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def form(self) -> FqQuadSpace:
        return self.ambient.restrict(self.basis)


# ---------------------------------------------------------------- constructors


def zero_space(p: int, r: int) -> FqQuadSpace:
    """Totally singular space: q identically zero on F_p^r."""
    return FqQuadSpace(p, np.zeros((r, r), dtype=np.int64))


def hyperbolic_space(p: int, t: int) -> FqQuadSpace:
    c = np.zeros((2 * t, 2 * t), dtype=np.int64)
    for i in range(t):
        c[2 * i, 2 * i + 1] = 1
    return FqQuadSpace(p, c)


@lru_cache(maxsize=None)
def _nonsquare(p: int) -> int:
    return next(e for e in range(2, p) if pow(e, (p - 1) // 2, p) == p - 1)


def aniso_plane(p: int) -> FqQuadSpace:
    if p == 2:
        return FqQuadSpace(2, [[1, 1], [0, 1]])
    return FqQuadSpace(p, [[1, 0], [0, (-_nonsquare(p)) % p]])


def line_space(p: int, value: int = 1) -> FqQuadSpace:
    return FqQuadSpace(p, [[value % p]])


def orthogonal_sum(*spaces: FqQuadSpace) -> FqQuadSpace:
    if not spaces:
        raise ValueError("need at least one summand")
    p = spaces[0].p
    if any(s.p != p for s in spaces):
        raise ValueError("summands live over different fields")
    n = sum(s.dim for s in spaces)
    c = np.zeros((n, n), dtype=np.int64)
    off = 0
    for s in spaces:
        c[off : off + s.dim, off : off + s.dim] = s.coeffs
        off += s.dim
    return FqQuadSpace(p, c)


def space_from_class(wd: WittDecomposition, p: int) -> FqQuadSpace:
    parts = [zero_space(p, wd.rad_dim), hyperbolic_space(p, wd.hyp_count)]
    if wd.residual is Residual.LINE:
        parts.append(line_space(p))
    elif wd.residual is Residual.ANISO_PLANE:
        parts.append(aniso_plane(p))
    return orthogonal_sum(*parts)


# ---------------------------------------------------------------- structure


def radical(V: FqQuadSpace) -> Subspace:
    """rad V = {x : q(x) = 0 and b(x, V) = 0}."""
    p = V.p
    if V.dim == 0:
        return Subspace(V, np.zeros((0, 0), dtype=np.int64))
    ker = modp.nullspace(V.polar_matrix(), p)
    if p != 2 or ker.shape[0] == 0:
        return Subspace(V, ker)
    # q is additive and F_2-linear on ker b; rad is the kernel of that functional
    vals = V.q(ker)
    if not vals.any():
        return Subspace(V, ker)
    coords = modp.nullspace(vals.reshape(1, -1), 2)
    return Subspace(V, coords @ ker % 2)


def _span_vectors(basis: np.ndarray, p: int) -> np.ndarray:
    """All vectors of the span of the rows of ``basis`` (including 0)."""
    k = basis.shape[0]
    coeffs = np.array(list(itertools.product(range(p), repeat=k)), dtype=np.int64)
    return coeffs @ basis % p


def _isotropic_in_span(V: FqQuadSpace, basis: np.ndarray):
    vecs = _span_vectors(basis, V.p)[1:]
    hits = np.nonzero(V.q(vecs) == 0)[0]
    return vecs[hits[0]] if hits.size else None


def _plane_is_hyperbolic(V: FqQuadSpace, e1, e2) -> bool:
    """Classify the regular plane spanned by e1, e2."""
    p = V.p
    if p == 2:
        x, y = plane_normal_basis(V, e1, e2)
        return V.q(y) in _artin_schreier_image(2)
    q1, q2, b = V.q(e1), V.q(e2), V.polar(e1, e2)
    inv2 = pow(2, -1, p)
    det = (q1 * q2 - (b * inv2) ** 2) % p
    if det == 0:
        raise NotRegular("plane is degenerate")
    return pow((-det) % p, (p - 1) // 2, p) == 1


@lru_cache(maxsize=None)
def _artin_schreier_image(p: int) -> frozenset:
    """H = {g^2 + g : g in F}."""
    return frozenset((g * g + g) % p for g in range(p))


def plane_normal_basis(V: FqQuadSpace, e1, e2):
    """Basis x, y of a regular plane over F_2 with q(x) = b(x, y) = 1."""
    if V.p != 2:
        raise ValueError("normal basis is only defined in characteristic 2")
    e1 = np.asarray(e1, dtype=np.int64) % 2
    e2 = np.asarray(e2, dtype=np.int64) % 2
    if V.polar(e1, e2) == 0:
        raise NotRegular("plane with vanishing bilinear form is not regular")
    if V.q(e1) == 1:
        return e1, e2
    if V.q(e2) == 1:
        return e2, e1
    return (e1 + e2) % 2, e2


def find_isotropic(V: FqQuadSpace, basis=None) -> np.ndarray:
    """A nonzero vector with q = 0 in the span of ``basis`` (default: V).

    Any three-dimensional quadratic space over a finite field is isotropic,
    so only three basis vectors are ever searched.
    """
    b = np.eye(V.dim, dtype=np.int64) if basis is None else np.asarray(basis, dtype=np.int64)
    b = b.reshape(-1, V.dim)
    if b.shape[0] == 0:
        raise AnisotropicSpace("zero space has no nonzero vectors")
    v = _isotropic_in_span(V, b[:3])
    if v is None:
        raise AnisotropicSpace("no isotropic vector")
    return v


def _complement_in(basis: np.ndarray, sub: np.ndarray, p: int) -> np.ndarray:
    """Vectors of span(basis) completing span(sub) to span(basis)."""
    coords = modp.solve_coords(basis, sub, p)
    extra = modp.extend_to_basis(coords, basis.shape[0], p)
    return extra @ basis % p


def hyperbolic_pair(V: FqQuadSpace, x, span_basis):
    """Complete isotropic ``x`` to a pair (x, y), q(y) = 0, b(x, y) = 1."""
    p = V.p
    x = np.asarray(x, dtype=np.int64) % p
    pol = V.polar_matrix()
    bx = np.asarray(span_basis) @ pol @ x % p
    idx = np.nonzero(bx)[0]
    if idx.size == 0:
        raise NotRegular("isotropic vector is orthogonal to the whole space")
    y = np.asarray(span_basis[idx[0]], dtype=np.int64)
    y = y * pow(int(bx[idx[0]]), -1, p) % p
    y = (y - V.q(y) * x) % p
    return x, y


def _split_off(V: FqQuadSpace, basis: np.ndarray, x, y) -> np.ndarray:
    """Basis of the orthogonal complement of the plane (x, y) inside span(basis)."""
    p = V.p
    rest = _complement_in(basis, np.vstack([x, y]), p)
    if rest.shape[0] == 0:
        return rest
    pol = V.polar_matrix()
    by = rest @ pol @ y % p
    bx = rest @ pol @ x % p
    return (rest - np.outer(by, x) - np.outer(bx, y)) % p


def witt_basis(V: FqQuadSpace):
    """Explicit splitting ``V = rad + H_1 + ... + H_t + W``.

    Returns ``(rad_basis, pairs, residual_basis, residual)`` where ``pairs``
    is a list of hyperbolic pairs ``(x, y)`` with q(x) = q(y) = 0 and
    b(x, y) = 1.
    """
    p = V.p
    rad = radical(V).basis
    if rad.shape[0]:
        cur = _complement_in(np.eye(V.dim, dtype=np.int64), rad, p)
    else:
        cur = np.eye(V.dim, dtype=np.int64)
    pairs = []
    while True:
        m = cur.shape[0]
        if m >= 3:
            x = find_isotropic(V, cur)
        elif m == 2:
            if not _plane_is_hyperbolic(V, cur[0], cur[1]):
                return rad, pairs, cur, Residual.ANISO_PLANE
            x = find_isotropic(V, cur)
        elif m == 1:
            return rad, pairs, cur, Residual.LINE
        else:
            return rad, pairs, cur, Residual.ZERO
        x, y = hyperbolic_pair(V, x, cur)
        pairs.append((x, y))
        cur = _split_off(V, cur, x, y)


def decompose(V: FqQuadSpace) -> WittDecomposition:
    rad, pairs, _, residual = witt_basis(V)
    return WittDecomposition(rad.shape[0], len(pairs), residual)


def orthogonal_complement(V: FqQuadSpace, U: Subspace) -> Subspace:
    if U.dim == 0:
        return V.full()
    return Subspace(V, modp.nullspace(U.basis @ V.polar_matrix() % V.p, V.p))


def compose_class(wd: WittDecomposition, t: int, aniso: bool = False) -> WittDecomposition:
    """Isometry type of ``U + H^t`` (or ``U + H^t + A`` when ``aniso``).

    Negative ``t`` cancels hyperbolic planes, which Witt cancellation makes
    well defined whenever enough planes are present.
    """
    hyp, res = wd.hyp_count, wd.residual
    if aniso:
        if res is Residual.ZERO:
            res = Residual.ANISO_PLANE
        elif res is Residual.LINE:
            hyp += 1
        else:
            hyp += 2
            res = Residual.ZERO
    hyp += t
    if hyp < 0:
        raise UndefinedComposition(
            f"cannot remove {-t} hyperbolic planes from {wd.as_tuple()}"
            + (" + A" if aniso else "")
        )
    return WittDecomposition(wd.rad_dim, hyp, res)


def complement_class(V: FqQuadSpace, U: Subspace) -> WittDecomposition:
    """Isometry type of U-perp in a regular even-dimensional V, from U alone."""
    if V.dim % 2:
        raise OddDimension("ambient space must have even dimension")
    vt = decompose(V)
    if not vt.regular:
        raise NotRegular("ambient space must be regular")
    half = V.dim // 2
    ut = decompose(U.form())
    if vt.hyperbolic:
        return compose_class(ut, half - U.dim)
    return compose_class(ut, half - U.dim - 1, aniso=True)


# ---------------------------------------------------------------- counting


def phi_regular(wd: WittDecomposition, ell: int, p: int) -> Fraction:
    """Closed-form number of totally isotropic ell-subspaces of a regular space."""
    if wd.rad_dim:
        raise NotRegular("phi_regular needs a regular type")
    if ell < 0:
        return Fraction(0)
    t = wd.hyp_count
    if wd.residual is Residual.ZERO:
        return beta(p, t, ell) * delta(p, t - 1, ell)
    if wd.residual is Residual.ANISO_PLANE:
        return beta(p, t, ell) * delta(p, t + 1, ell)
    return beta(p, t, ell) * delta(p, t, ell)


def phi_general(V, ell: int, p: int | None = None) -> Fraction:
    """Totally isotropic ell-subspaces of a possibly degenerate space.

    ``V`` is an :class:`FqQuadSpace` or a :class:`WittDecomposition` (then
    ``p`` is required).  A subspace meets the radical in some a-dimensional
    piece and projects onto a totally isotropic (ell - a)-subspace of the
    regular part; the lifts form a coset of Hom(F^(ell-a), F^(r-a)).
    """
    if isinstance(V, FqQuadSpace):
        wd, p = decompose(V), V.p
    else:
        wd = V
        if p is None:
            raise ValueError("p is required with a WittDecomposition")
    if ell < 0:
        return Fraction(0)
    r = wd.rad_dim
    reg = wd.regular_part()
    total = Fraction(0)
    for a in range(min(r, ell) + 1):
        total += beta(p, r, a) * ppow(p, (ell - a) * (r - a)) * phi_regular(reg, ell - a, p)
    return total


@njit(cache=True)
def _setup_row(level, pv, dim, p, inv, taken, polw, rows, sysm, fcols, nfree, npiv, piv_of, nnp, np_of):
    """Prepare the candidate rows with pivot ``pv`` orthogonal to earlier rows.

    Candidates are ``e_pv + sum a_j e_j`` over free columns j; orthogonality
    to the rows already chosen is a linear system in the a_j, reduced here so
    that only its solutions get enumerated.  Returns False if it has none.
    """
    for i in range(dim):
        rows[level, i] = 0
    rows[level, pv] = 1
    m = 0
    for j in range(pv + 1, dim):
        if not taken[j]:
            fcols[level, m] = j
            m += 1
    nfree[level] = m
    # augmented system: sum_j a_j polw[k, j] = -polw[k, pv]
    for k in range(level):
        for t in range(m):
            sysm[level, k, t] = polw[k, fcols[level, t]]
        sysm[level, k, m] = (-polw[k, pv]) % p
    r = 0
    is_piv = np.zeros(m, np.bool_)
    for col in range(m):
        sel = -1
        for k in range(r, level):
            if sysm[level, k, col] % p:
                sel = k
                break
        if sel < 0:
            continue
        for t in range(m + 1):
            tmp = sysm[level, r, t]
            sysm[level, r, t] = sysm[level, sel, t]
            sysm[level, sel, t] = tmp
        f = inv[sysm[level, r, col] % p]
        for t in range(m + 1):
            sysm[level, r, t] = sysm[level, r, t] * f % p
        for k in range(level):
            if k != r and sysm[level, k, col] % p:
                g = sysm[level, k, col]
                for t in range(m + 1):
                    sysm[level, k, t] = (sysm[level, k, t] - g * sysm[level, r, t]) % p
        piv_of[level, r] = col
        is_piv[col] = True
        r += 1
    for k in range(r, level):
        if sysm[level, k, m] % p:
            return False
    npiv[level] = r
    q = 0
    for col in range(m):
        if not is_piv[col]:
            np_of[level, q] = col
            q += 1
    nnp[level] = q
    return True


@njit(cache=True)
def _fill_pivots(level, p, rows, sysm, fcols, nfree, npiv, piv_of, nnp, np_of):
    m = nfree[level]
    for k in range(npiv[level]):
        s = sysm[level, k, m]
        for t in range(nnp[level]):
            col = np_of[level, t]
            s -= sysm[level, k, col] * rows[level, fcols[level, col]]
        rows[level, fcols[level, piv_of[level, k]]] = s % p


@njit(cache=True)
def _count_last(level, p, c, pol, roots, rows, sysm, fcols, nfree, npiv, piv_of, nnp, np_of):
    """Count q = 0 on the affine set of admissible last rows.

    The set is ``x0 + span(w_t)``; q is tracked incrementally along the
    odometer and the innermost coordinate is settled by a root-count table.
    """
    dim = c.shape[0]
    m = nfree[level]
    n = nnp[level]
    x0 = rows[level].copy()
    for t in range(n):
        x0[fcols[level, np_of[level, t]]] = 0
    for k in range(npiv[level]):
        x0[fcols[level, piv_of[level, k]]] = sysm[level, k, m] % p
    w = np.zeros((n, dim), np.int64)
    for t in range(n):
        col = np_of[level, t]
        w[t, fcols[level, col]] = 1
        for k in range(npiv[level]):
            w[t, fcols[level, piv_of[level, k]]] = (-sysm[level, k, col]) % p
    q0 = 0
    for i in range(dim):
        if x0[i]:
            for j in range(i, dim):
                q0 += c[i, j] * x0[i] * x0[j]
    q0 %= p
    if n == 0:
        return 1 if q0 == 0 else 0
    polx = np.zeros(dim, np.int64)
    for i in range(dim):
        s = 0
        for j in range(dim):
            s += pol[i, j] * x0[j]
        polx[i] = s
    h = np.zeros(n, np.int64)
    qw = np.zeros(n, np.int64)
    bw = np.zeros((n, n), np.int64)
    for t in range(n):
        s = 0
        for i in range(dim):
            s += w[t, i] * polx[i]
        h[t] = s % p
        s = 0
        for i in range(dim):
            if w[t, i]:
                for j in range(i, dim):
                    s += c[i, j] * w[t, i] * w[t, j]
        qw[t] = s % p
        for u in range(n):
            s = 0
            for i in range(dim):
                if w[t, i]:
                    for j in range(dim):
                        s += w[t, i] * pol[i, j] * w[u, j]
            bw[t, u] = s % p
    digits = np.zeros(n, np.int64)
    total = 0
    q = q0
    while True:
        total += roots[q, h[0], qw[0]]
        k = 1
        while k < n:
            # step coordinate k by one: x -> x + w_k
            q = (q + h[k] + qw[k]) % p
            for u in range(n):
                h[u] = (h[u] + bw[k, u]) % p
            digits[k] += 1
            if digits[k] < p:
                break
            digits[k] = 0
            k += 1
        if k >= n:
            break
    return total


@njit(cache=True)
def _echelon_walk(c, pol, p, ell):
    """Number of totally isotropic ell-subspaces, one reduced echelon basis each.

    Rows are chosen from the largest pivot down; a row with pivot ``pv`` is
    ``e_pv`` plus free entries to its right, zero at the pivots already
    taken.  Orthogonality is solved for, q = 0 is tested per candidate.
    """
    dim = c.shape[0]
    inv = np.zeros(p, np.int64)
    for a in range(1, p):
        for b in range(1, p):
            if a * b % p == 1:
                inv[a] = b
    rows = np.zeros((ell, dim), np.int64)
    polw = np.zeros((ell, dim), np.int64)
    cur = np.zeros(ell, np.int64)
    fcols = np.zeros((ell, dim), np.int64)
    nfree = np.zeros(ell, np.int64)
    sysm = np.zeros((ell, ell, dim + 1), np.int64)
    npiv = np.zeros(ell, np.int64)
    piv_of = np.zeros((ell, dim), np.int64)
    nnp = np.zeros(ell, np.int64)
    np_of = np.zeros((ell, dim), np.int64)
    taken = np.zeros(dim, np.bool_)
    # roots[a, b, e] = #{z in F_p : a + b z + e z^2 = 0}
    roots = np.zeros((p, p, p), np.int64)
    for a in range(p):
        for b in range(p):
            for e in range(p):
                for z in range(p):
                    if (a + b * z + e * z * z) % p == 0:
                        roots[a, b, e] += 1
    count = 0
    level = 0
    cur[0] = dim - 1
    fresh = True
    while True:
        if fresh and level == ell - 1:
            while cur[level] >= ell - 1 - level:
                if _setup_row(level, cur[level], dim, p, inv, taken, polw, rows, sysm,
                              fcols, nfree, npiv, piv_of, nnp, np_of):
                    count += _count_last(level, p, c, pol, roots, rows, sysm, fcols,
                                         nfree, npiv, piv_of, nnp, np_of)
                cur[level] -= 1
        if fresh:
            fresh = False
            while cur[level] >= ell - 1 - level:
                if _setup_row(level, cur[level], dim, p, inv, taken, polw, rows, sysm,
                              fcols, nfree, npiv, piv_of, nnp, np_of):
                    _fill_pivots(level, p, rows, sysm, fcols, nfree, npiv, piv_of, nnp, np_of)
                    break
                cur[level] -= 1
        pv = cur[level]
        if pv < ell - 1 - level:
            if level == 0:
                break
            level -= 1
            taken[cur[level]] = False
        else:
            x = rows[level]
            s = 0
            for i in range(dim):
                if x[i]:
                    for j in range(i, dim):
                        s += c[i, j] * x[i] * x[j]
            if s % p == 0:
                if level == ell - 1:
                    count += 1
                else:
                    for i in range(dim):
                        s = 0
                        for j in range(dim):
                            s += pol[i, j] * x[j]
                        polw[level, i] = s % p
                    taken[pv] = True
                    level += 1
                    cur[level] = pv - 1
                    fresh = True
                    continue
        # odometer over the unconstrained free entries of the current row
        k = 0
        m = nnp[level]
        while k < m:
            j = fcols[level, np_of[level, k]]
            rows[level, j] += 1
            if rows[level, j] < p:
                break
            rows[level, j] = 0
            k += 1
        if k == m:
            cur[level] -= 1
            fresh = True
        else:
            _fill_pivots(level, p, rows, sysm, fcols, nfree, npiv, piv_of, nnp, np_of)
    return count


def phi_brute(V: FqQuadSpace, ell: int, limit: int | None = PHI_BRUTE_LIMIT) -> int:
    """Count totally isotropic ell-subspaces by walking echelon forms.

    Every subspace has exactly one reduced echelon basis, so each one is
    visited once.  ``limit`` caps the number of ell-subspaces of the ambient
    space; pass ``None`` to lift the cap.
    """
    p, dim = V.p, V.dim
    if ell < 0 or ell > dim:
        return 0
    if ell == 0:
        return 1
    if limit is not None and beta(p, dim, ell) > limit:
        raise TooLarge(f"{beta(p, dim, ell)} subspaces of dimension {ell} exceed limit {limit}")
    coeffs = np.ascontiguousarray(V.coeffs, dtype=np.int64)
    pol = np.ascontiguousarray(V.polar_matrix(), dtype=np.int64)
    return int(_echelon_walk(coeffs, pol, p, ell))


def totally_isotropic_subspaces(V: FqQuadSpace, ell: int, limit: int | None = PHI_BRUTE_LIMIT) -> list:
    """Reduced echelon bases (ell x dim arrays) of every totally isotropic ell-subspace.

    Slow and explicit; meant for small ambient spaces where the subspaces
    themselves are needed, not just their number.
    """
    p, dim = V.p, V.dim
    if ell < 0 or ell > dim:
        return []
    if ell == 0:
        return [np.zeros((0, dim), dtype=np.int64)]
    if limit is not None and beta(p, dim, ell) > limit:
        raise TooLarge(f"{beta(p, dim, ell)} subspaces of dimension {ell} exceed limit {limit}")
    pol = V.polar_matrix()
    out = []
    for pivots in itertools.combinations(range(dim), ell):
        free = [(i, c) for i, pv in enumerate(pivots) for c in range(pv + 1, dim) if c not in pivots]
        for vals in itertools.product(range(p), repeat=len(free)):
            R = np.zeros((ell, dim), dtype=np.int64)
            for i, pv in enumerate(pivots):
                R[i, pv] = 1
            for (i, c), v in zip(free, vals):
                R[i, c] = v
            if V.q(R).any():
                continue
            if (np.triu(R @ pol @ R.T % p, 1)).any():
                continue
            out.append(R)
    return out


# ---------------------------------------------------------------- reduction lemma


def reduction_rhs(U: WittDecomposition, t: int, ell: int, p: int, variant: str = "a") -> Fraction:
    """Right-hand side expressing phi_ell(U + H^t [+ A]) through phi_r(U).

    Raises :class:`UndefinedComposition` when ``t < 0`` cannot be cancelled.
    """
    if variant not in ("a", "b"):
        raise ValueError("variant must be 'a' or 'b'")
    compose_class(U, t, aniso=variant == "b")
    d = U.dim
    total = Fraction(0)
    for r in range(ell + 1):
        phi_r = phi_general(U, r, p)
        if not phi_r:
            continue
        if variant == "a":
            term = ppow(p, r * (t - ell + r)) * delta(p, d - 1 + t - r, ell - r) * beta(p, t, ell - r)
        else:
            term = (
                (-1) ** r
                * ppow(p, r * (t + 1 - ell + r))
                * beta(p, d + t - r, ell - r)
                * delta(p, t + 1, ell - r)
            )
        total += term * phi_r
    return total


# ---------------------------------------------------------------- constructive lemmas


def split_anisotropic_vector(V: FqQuadSpace, v):
    """Hyperbolic plane through an anisotropic v in a regular isotropic even-dim V.

    Returns ``(plane_basis, rest_basis)`` with ``V = plane + rest`` orthogonal
    and ``v-perp = F v + rest``.
    """
    p = V.p
    v = np.asarray(v, dtype=np.int64) % p
    if V.q(v) == 0:
        raise ValueError("v must be anisotropic")
    pol = V.polar_matrix()
    full = np.eye(V.dim, dtype=np.int64)
    # an isotropic w with b(v, w) != 0 spans a hyperbolic plane together with v
    for w in _span_vectors(full, p)[1:]:
        if V.q(w) == 0 and int(v @ pol @ w % p):
            plane = np.vstack([v, w])
            rest = _split_off_plane(V, plane)
            return plane, rest
    raise AnisotropicSpace("no isotropic partner for v")


def _split_off_plane(V: FqQuadSpace, plane: np.ndarray) -> np.ndarray:
    p = V.p
    x = find_isotropic(V, plane)
    x, y = hyperbolic_pair(V, x, plane)
    return _split_off(V, np.eye(V.dim, dtype=np.int64), x, y)


def hyperbolic_mate(V: FqQuadSpace, R: Subspace) -> np.ndarray:
    """Basis of R' with R + R' hyperbolic of dimension 2 dim R (regular V)."""
    p = V.p
    pol = V.polar_matrix()
    basis = np.eye(V.dim, dtype=np.int64)
    rows = R.basis.copy()
    mates = []
    while rows.shape[0]:
        x = rows[0]
        x, y = hyperbolic_pair(V, x, basis)
        mates.append(y)
        # shift the remaining isotropic vectors into the complement of (x, y)
        rest = rows[1:]
        if rest.shape[0]:
            by = rest @ pol @ y % p
            rest = (rest - np.outer(by, x)) % p
        basis = _split_off(V, basis, x, y)
        rows = rest
    return np.array(mates, dtype=np.int64).reshape(-1, V.dim)
