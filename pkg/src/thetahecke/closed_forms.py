"""Closed-form coefficient formulas for theta series under the p^2 operators.

For a rank-2k lattice L and an n-tuple Omega in (1/p)L, write pOmega in L
coordinates as an integer matrix Y.  Its p-adic invariant factors split
Omega as (1/p)Omega_0 + Omega_1 + pOmega_2 with ranks r0, r1, r2; the
closed forms only need those ranks and the F_p-space Omega_1 / pOmega_1.

Everything here is checked against the direct lattice sums of
:mod:`thetahecke.hecke` and against explicit neighbour lattices K_j with
pL <= K_j <= (1/p)L, mult(1/p) = mult(p) = j.
"""
from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numba import njit

from . import modp
from .fourier import FourierMap, format_rational
from .fqspace import (
    FqQuadSpace,
    Residual,
    WittDecomposition,
    decompose,
    phi_general,
    space_from_class,
    totally_isotropic_subspaces,
)
from .gramclass import GramClass, aut_order, class_inventory
from .hecke import (
    HeckeContext,
    _frame,
    _phi_of_gram,
    apply_Tp,
    apply_Tp_squared,
    apply_Tprime,
    exponent_Ej,
    operator_identity_check,
    ttilde_coefficient,
)
from .intmat import hnf_columns, rational_inverse, smith, sublattices_between, unimodular_inverse
from .lattice import IntegralLattice, theta_coefficients, theta_series
from .qanalog import beta, delta, mu, ppow

__all__ = [
    "E_PRIME_VARIANTS",
    "IndexOutOfRange",
    "MixedGenus",
    "NeighborLattice",
    "NotInOverlattice",
    "OmegaProfile",
    "Report",
    "b_j_closed",
    "b_j_direct",
    "c_tilde_closed",
    "c_tilde_direct",
    "c_tilde_from_key",
    "dual_path_b",
    "dual_path_c_tilde",
    "eigenvalue_lambda_j",
    "enumerate_Kj",
    "genus_average",
    "omega_profile",
    "v_coeff",
    "verify_commutation",
    "verify_eigenform",
    "verify_operator_identity",
    "verify_vanishing",
]

# the t-part of the exponent: t(t+1)/2 ("statement") or t(t-1)/2 ("derivation")
E_PRIME_VARIANTS = ("statement", "derivation")


class IndexOutOfRange(ValueError):
    """j lies outside the range where a closed form is claimed."""


class NotInOverlattice(ValueError):
    """The tuple does not lie in (1/p)L."""


class MixedGenus(ValueError):
    """Genus representatives disagree in rank, level, discriminant or character."""


# ------------------------------------------------------------------ profiles


@dataclass(frozen=True)
class OmegaProfile:
    r0: int
    r1: int
    r2: int
    omega1_bar: FqQuadSpace = field(compare=False)

    @property
    def n(self) -> int:
        return self.r0 + self.r1 + self.r2

    @property
    def p(self) -> int:
        return self.omega1_bar.p

    @property
    def witt(self) -> WittDecomposition:
        return decompose(self.omega1_bar)

    def key(self) -> tuple:
        return (self.r0, self.r1, self.r2, self.p) + self.witt.as_tuple()


def _valuation(x: int, p: int) -> float:
    if x == 0:
        return float("inf")
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e


def _profile_scaled(A: np.ndarray, Y: np.ndarray, p: int) -> OmegaProfile:
    """Profile from Y = p * (coordinates of Omega), an integer rank x n matrix."""
    rank, n = Y.shape
    if n > rank:
        raise ValueError("formal rank exceeds the lattice rank")
    padded = [[int(Y[i, j]) if j < n else 0 for j in range(rank)] for i in range(rank)]
    d, P, _ = smith(padded)
    Pinv = np.array(unimodular_inverse(P), dtype=np.int64)
    vals = [_valuation(x, p) for x in d[:n]]
    r0 = sum(v == 0 for v in vals)
    r1 = sum(v == 1 for v in vals)
    cols = [i for i in range(n) if vals[i] == 1]
    U = Pinv[:, cols]
    G = U.T @ A @ U
    return OmegaProfile(r0, r1, n - r0 - r1, FqQuadSpace.from_gram(G, p))


def omega_profile(L: IntegralLattice, omega, p: int) -> OmegaProfile:
    """Decompose an n-tuple Omega in (1/p)L given by its L-coordinates (rank x n)."""
    X = [[Fraction(x) for x in row] for row in omega]
    Y = [[x * p for x in row] for row in X]
    if any(y.denominator != 1 for row in Y for y in row):
        raise NotInOverlattice("p * Omega is not contained in L")
    Y = np.array([[int(y) for y in row] for row in Y], dtype=np.int64)
    if Y.shape[0] != L.rank:
        raise ValueError("coordinates must have one row per basis vector of L")
    return _profile_scaled(L.matrix(), Y, p)


# ------------------------------------------------------------------ closed forms


def _e_prime(ell: int, t: int, r0: int, r1: int, k: int, n: int, variant: str) -> int:
    tt = t * (t + 1) // 2 if variant == "statement" else t * (t - 1) // 2
    return ell * (k - r0 - r1) + ell * (ell - 1) // 2 + t * (k - n) + tt


def c_tilde_closed(profile: OmegaProfile, k: int, n: int, j: int, p: int, chi: int,
                   variant: str = "derivation") -> Fraction:
    """Coefficient of e{Omega tau} in theta(L) | T~_j(p^2), as a double sum over (ell, t)."""
    if variant not in E_PRIME_VARIANTS:
        raise ValueError(f"variant must be one of {E_PRIME_VARIANTS}")
    if not 1 <= j <= n <= 2 * k:
        raise IndexOutOfRange("need 1 <= j <= n <= 2k")
    r0, r1, r2 = profile.r0, profile.r1, profile.r2
    wd = profile.witt
    total = Fraction(0)
    for ell in range(j - r0 + 1):
        phi = phi_general(wd, ell, p)
        if phi == 0:
            continue
        for t in range(j - r0 - ell + 1):
            tail = beta(p, n - r0 - ell - t, j - r0 - ell - t)
            if chi == 1:
                mid = delta(p, k - r0 - ell - 1, t) * beta(p, r2, t)
            else:
                mid = (-1) ** ell * beta(p, k - r0 - ell - 1, t) * mu(p, r2, t)
            if mid == 0 or tail == 0:
                continue
            total += ppow(p, _e_prime(ell, t, r0, r1, k, n, variant)) * phi * mid * tail
    return total


def _check_neighbor_range(k: int, j: int, chi: int) -> None:
    top = k if chi == 1 else k - 1
    if not 0 <= j <= top:
        raise IndexOutOfRange(f"j = {j} outside [0, {top}] for chi(p) = {chi:+d}")


def b_j_closed(profile: OmegaProfile, k: int, n: int, j: int, p: int, chi: int) -> Fraction:
    """Coefficient of e{Omega tau} in sum_{K_j} theta(K_j)."""
    _check_neighbor_range(k, j, chi)
    if j < 1:
        raise IndexOutOfRange("j must be at least 1")
    r0, r1 = profile.r0, profile.r1
    wd = profile.witt
    total = Fraction(0)
    for ell in range(j - r0 + 1):
        phi = phi_general(wd, ell, p)
        if phi == 0:
            continue
        m = j - r0 - ell
        if chi == 1:
            rest = delta(p, k - r0 - ell - 1, m) * beta(p, k - r0 - r1, m)
        else:
            rest = (-1) ** ell * beta(p, k - r0 - ell - 1, m) * delta(p, k - r0 - r1, m)
        total += ppow(p, ell * (k - j - r1 + ell)) * phi * rest
    return ppow(p, (j - r0) * (j - r0 - 1) // 2) * total if j >= r0 else Fraction(0)


def eigenvalue_lambda_j(p: int, k: int, n: int, j: int, chi: int) -> Fraction:
    """Eigenvalue of T'_j(p^2) on the genus theta series."""
    _check_neighbor_range(k, j, chi)
    if j < 1:
        raise IndexOutOfRange("j must be at least 1")
    head = ppow(p, j * (k - n) + j * (j - 1) // 2) * beta(p, n, j)
    if chi == 1:
        return head * delta(p, k - 1, j)
    return head * mu(p, k - 1, j)


def v_coeff(p: int, k: int, n: int, j: int, q: int, chi: int) -> Fraction:
    if chi == 1:
        return (-1) ** q * beta(p, k - n + q - 1, q) * delta(p, k - j + q - 1, q)
    return (-1) ** q * delta(p, k - n + q - 1, q) * beta(p, k - j + q - 1, q)


# ------------------------------------------------------------------ direct sums over Lambda


@lru_cache(maxsize=None)
def _inner_frames(n: int, p: int) -> tuple:
    """Lambda = (1/p) C Z^n in Omega coordinates, with the frame data of {Omega : Lambda}."""
    return tuple((np.array(C, dtype=np.int64), _frame(C, p, 1)) for C in sublattices_between(p, n, 2))


def c_tilde_direct(L: IntegralLattice, Y: np.ndarray, p: int, j: int, chi: int) -> Fraction:
    """The same coefficient as a sum over p Omega <= Lambda <= (1/p) Omega with Lambda in L.

    Each Lambda enters with the summand of the operator formula taken at
    the output Omega, so the multiplicities are those of {Omega : Lambda}
    and the quotient space lives in Omega.
    """
    Y = np.asarray(Y, dtype=np.int64)
    A = L.matrix()
    n = Y.shape[1]
    pp = p * p
    T_om = Y.T @ A @ Y
    if (T_om % pp).any():
        raise NotInOverlattice("Omega is not integral")
    T_om //= pp
    total = Fraction(0)
    for C, fr in _inner_frames(n, p):
        if ((Y @ C) % pp).any():
            continue
        dim = fr.mults[1]
        target = dim - (n - j)
        if target < 0:
            continue
        if dim == 0:
            a = 1
        else:
            U = np.array(fr.quotient_basis, dtype=np.int64).T
            a = _phi_of_gram(tuple(map(tuple, (U.T @ T_om @ U).tolist())), p, target)
        if a == 0:
            continue
        sign = chi ** ((j - n + fr.mults[1]) % 2)
        total += sign * ppow(p, exponent_Ej(fr.mults, L.k, n, j)) * a
    return total


# ------------------------------------------------------------------ neighbour lattices


@dataclass(frozen=True)
class NeighborLattice:
    """K = (1/p) M Z^rank in L coordinates, with mult(1/p) = mult(p) = j."""

    frame: tuple
    j: int
    gram: tuple

    def lattice(self) -> IntegralLattice:
        return IntegralLattice(self.gram)

    def contains(self, Y: np.ndarray) -> bool:
        """Is the tuple (1/p) Y (Y integer, in L coordinates) inside K?"""
        adj, den = _adjugate(self.frame)
        return not ((adj @ np.asarray(Y, dtype=np.int64)) % den).any()


@lru_cache(maxsize=None)
def _adjugate(M: tuple):
    inv = rational_inverse(M)
    den = 1
    for row in inv:
        for x in row:
            den = den * x.denominator // np.gcd(den, x.denominator)
    adj = np.array([[int(x * den) for x in row] for row in inv], dtype=np.int64)
    return adj, den


def _inverse_mod(M: np.ndarray, p: int) -> np.ndarray:
    m = M.shape[0]
    R, piv = modp.rref(np.hstack([M % p, np.eye(m, dtype=np.int64)]), p)
    if piv[:m] != list(range(m)):
        raise ValueError("matrix is singular mod p")
    return R[:, m:]


def enumerate_Kj(L: IntegralLattice, p: int, j: int) -> list:
    """Every even integral K with pL <= K <= (1/p)L and mult(1/p) = mult(p) = j.

    Built from the totally isotropic j-subspaces C of L/pL: K meets L in the
    preimage L_C of C-perp, and K = L_C + sum Z (c_i + p x_i)/p with x_i
    running over L/L_C.  Lifts that are not even integral are dropped.
    """
    chi = L.character_at(p)
    _check_neighbor_range(L.k, j, chi)
    A = L.matrix()
    rank = L.rank
    if j == 0:
        return [NeighborLattice(tuple(tuple(p * int(i == c) for c in range(rank)) for i in range(rank)), 0, L.gram)]
    V = L.mod_p_space(p)
    seen = {}
    for Cb in totally_isotropic_subspaces(V, j, limit=None):
        G = Cb @ A % p  # x -> (c_i . x mod p)
        null = modp.nullspace(G, p)
        gens = np.hstack([null.T, p * np.eye(rank, dtype=np.int64)])
        LC = np.array(hnf_columns(gens.tolist()), dtype=np.int64)
        _, piv = modp.rref(G, p)
        E = np.zeros((rank, j), dtype=np.int64)
        E[piv, :] = _inverse_mod(G[:, piv], p)
        for s in itertools.product(range(p), repeat=j * j):
            S = np.array(s, dtype=np.int64).reshape(j, j)
            lifts = Cb.T + p * (E @ S.T)  # column i: c_i + p sum_l s_il e_l
            M = np.array(hnf_columns(np.hstack([p * LC, lifts]).tolist()), dtype=np.int64)
            key = tuple(map(tuple, M.tolist()))
            if key in seen:
                continue
            gram = M.T @ A @ M
            if (gram % (p * p)).any():
                continue
            gram //= p * p
            if (np.diag(gram) % 2).any():
                continue
            d, _, _ = smith(key)
            if sum(x == 1 for x in d) != j or sum(x == p * p for x in d) != j:
                continue
            seen[key] = NeighborLattice(key, j, tuple(map(tuple, gram.tolist())))
    return [seen[k] for k in sorted(seen)]


def b_j_direct(Ks: list, Y: np.ndarray) -> int:
    """Number of K_j containing the tuple (1/p)Y."""
    return sum(K.contains(Y) for K in Ks)


# ------------------------------------------------------------------ reports


@dataclass
class Report:
    """Outcome of one verification: per-class rows and a pass flag."""

    check: str
    params: dict
    rows: list
    passed: bool
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "params": self.params,
            "passed": self.passed,
            "rows": self.rows,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        cols = sorted({c for r in self.rows for c in r})
        lines = [",".join(cols)]
        for r in self.rows:
            lines.append(",".join(_csv_cell(r.get(c, "")) for c in cols))
        return "\n".join(lines) + "\n"

    def failing(self) -> list:
        return [r for r in self.rows if not r.get("ok", True)]


def _csv_cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return ";".join(" ".join(str(x) for x in row) if isinstance(row, (list, tuple)) else str(row) for row in v)
    return str(v)


def _delta_rows(lhs: FourierMap, rhs: FourierMap) -> list:
    rows = []
    for cls in class_inventory(lhs.n, min(lhs.trace_bound, rhs.trace_bound)):
        a, b = lhs.coeff(cls), rhs.coeff(cls)
        rows.append({
            "class_gram": [list(r) for r in cls.rep],
            "trace": cls.trace,
            "lhs": format_rational(a),
            "rhs": format_rational(b),
            "delta": format_rational(a - b),
            "ok": a == b,
        })
    return rows


def _classes(n: int, bound: int) -> list:
    return class_inventory(n, bound)


@njit(cache=True)
def _rref_rows_mod(M, p):
    """In-place row reduction mod p; returns the rank (pivot rows come first)."""
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if M[i, c] % p != 0:
                piv = i
                break
        if piv < 0:
            continue
        for k in range(cols):
            tmp = M[r, k]
            M[r, k] = M[piv, k]
            M[piv, k] = tmp
        inv = 1
        a = M[r, c] % p
        while (a * inv) % p != 1:
            inv += 1
        for k in range(cols):
            M[r, k] = (M[r, k] * inv) % p
        for i in range(rows):
            if i != r and M[i, c] % p != 0:
                f = M[i, c] % p
                for k in range(cols):
                    M[i, k] = (M[i, k] - f * M[r, k]) % p
        r += 1
    return r


@njit(cache=True)
def _profile_kernel(Ys, A, p):
    """For each tuple: rank of Y mod p, and an F_p-basis (with Gram) of the image of Omega cap L."""
    m, rank, n = Ys.shape
    r0 = np.zeros(m, dtype=np.int64)
    dimw = np.zeros(m, dtype=np.int64)
    grams = np.zeros((m, n, n), dtype=np.int64)
    total = 1
    for _ in range(n):
        total *= p
    gens = np.zeros((n + total, rank), dtype=np.int64)
    y = np.zeros(n, dtype=np.int64)
    for t in range(m):
        Y = Ys[t]
        ng = 0
        for c in range(n):
            for r in range(rank):
                gens[ng, r] = Y[r, c] % p
            ng += 1
        nnull = 0
        for code in range(total):
            x = code
            for i in range(n):
                y[i] = x % p
                x //= p
            ok = True
            for r in range(rank):
                s = 0
                for i in range(n):
                    s += Y[r, i] * y[i]
                if s % p != 0:
                    ok = False
                    break
            if not ok:
                continue
            nnull += 1
            for r in range(rank):
                s = 0
                for i in range(n):
                    s += Y[r, i] * y[i]
                gens[ng, r] = (s // p) % p
            ng += 1
        rk = 0
        x = nnull
        while x > 1:
            x //= p
            rk += 1
        r0[t] = n - rk
        G = gens[:ng].copy()
        d = _rref_rows_mod(G, p)
        dimw[t] = d
        for a in range(d):
            for b in range(d):
                s = 0
                for u in range(rank):
                    for v in range(rank):
                        s += G[a, u] * A[u, v] * G[b, v]
                grams[t, a, b] = s
    return r0, dimw, grams


def _profile_keys(A: np.ndarray, Ys: np.ndarray, p: int, cache: dict) -> list:
    """Profile key (r0, r1, r2, p, rad, hyp, residual) of every tuple in the stack."""
    m, _, n = Ys.shape
    if m == 0:
        return []
    r0s, dims, grams = _profile_kernel(np.ascontiguousarray(Ys), np.ascontiguousarray(A), p)
    keys = []
    for r0, d, g in zip(r0s.tolist(), dims.tolist(), grams):
        sub = g[:d, :d]
        ck = (r0, d, sub.tobytes())
        if ck not in cache:
            wd = decompose(FqQuadSpace.from_gram(sub, p)) if d else WittDecomposition(0, 0, Residual.ZERO)
            cache[ck] = (r0, d - r0, n - d, p, wd.rad_dim - r0, wd.hyp_count, wd.residual.name)
        keys.append(cache[ck])
    return keys


def _profile_from_key(key: tuple) -> tuple:
    r0, r1, r2, p, rad, hyp, res = key
    return r0, r1, r2, WittDecomposition(rad, hyp, Residual[res])


def c_tilde_from_key(key: tuple, k: int, n: int, j: int, chi: int, variant: str = "derivation") -> Fraction:
    r0, r1, r2, wd = _profile_from_key(key)
    prof = OmegaProfile(r0, r1, r2, space_from_class(wd, key[3]))
    return c_tilde_closed(prof, k, n, j, key[3], chi, variant)


@lru_cache(maxsize=8)
def _tuple_census(L: IntegralLattice, p: int, n: int, bound: int) -> tuple:
    """Per class of trace <= bound: Counter of (profile key, frame mask) over tuples of (1/p)L."""
    A = L.matrix()
    frames = _inner_frames(n, p)
    Cs = np.array([C for C, _ in frames], dtype=np.int64)
    pp = p * p
    cache: dict = {}
    out = []
    for cls in _classes(n, bound):
        Ys = L.representations(pp * cls.matrix())
        census = Counter()
        if len(Ys):
            prod = np.einsum("mrn,cnk->mcrk", Ys, Cs) % pp
            masks = ~prod.reshape(len(Ys), len(Cs), -1).any(axis=2)
            keys = _profile_keys(A, Ys, p, cache)
            for key, mask in zip(keys, np.packbits(masks, axis=1)):
                census[(key, mask.tobytes())] += 1
        out.append((cls, census))
    return tuple(out)


def _frame_weights(T: np.ndarray, p: int, k: int, n: int, j: int, chi: int) -> list:
    """Summand of the operator formula for each inner frame, at output Gram T."""
    ws = []
    for _, fr in _inner_frames(n, p):
        dim = fr.mults[1]
        target = dim - (n - j)
        if target < 0:
            ws.append(Fraction(0))
            continue
        if dim == 0:
            a = 1
        else:
            U = np.array(fr.quotient_basis, dtype=np.int64).T
            a = _phi_of_gram(tuple(map(tuple, (U.T @ T @ U).tolist())), p, target)
        sign = chi ** ((j - n + fr.mults[1]) % 2)
        ws.append(sign * ppow(p, exponent_Ej(fr.mults, k, n, j)) * a)
    return ws


def dual_path_c_tilde(L: IntegralLattice, p: int, n: int, j: int, bound: int) -> Report:
    """Closed-form coefficients against the direct operator, class by class.

    Every n-tuple Omega in (1/p)L whose Gram matrix is a class representative
    of trace <= bound is profiled.  Per tuple, the closed form (both exponent
    variants) is compared with the direct sum over intermediate lattices
    Lambda in L; per class, the closed forms summed over tuples must equal
    the coefficient of theta(L) | T~_j(p^2) computed by the operator itself.
    """
    chi = L.character_at(p)
    ctx = HeckeContext.for_lattice(L, p)
    theta = theta_series(L, n)
    k = L.k
    nframes = len(_inner_frames(n, p))
    closed_cache: dict = {}
    rows = []
    variant_ok = {v: True for v in E_PRIME_VARIANTS}
    mismatch = {v: 0 for v in E_PRIME_VARIANTS}
    n_omega = 0
    for cls, census in _tuple_census(L, p, n, bound):
        ws = _frame_weights(cls.matrix(), p, k, n, j, chi)
        sums = {v: Fraction(0) for v in E_PRIME_VARIANTS}
        count = 0
        for (key, mask), mult in sorted(census.items()):
            if key not in closed_cache:
                closed_cache[key] = {v: c_tilde_from_key(key, k, n, j, chi, v) for v in E_PRIME_VARIANTS}
            bits = np.unpackbits(np.frombuffer(mask, dtype=np.uint8))[:nframes]
            direct = sum((w for w, b in zip(ws, bits) if b), Fraction(0))
            for v in E_PRIME_VARIANTS:
                val = closed_cache[key][v]
                sums[v] += mult * val
                if val != direct:
                    mismatch[v] += mult
            count += mult
        n_omega += count
        target = ttilde_coefficient(theta, cls, ctx, j)
        row = {"class_gram": [list(r) for r in cls.rep], "trace": cls.trace, "omegas": count,
               "operator": format_rational(target)}
        for v in E_PRIME_VARIANTS:
            row[f"closed_{v}"] = format_rational(sums[v])
            variant_ok[v] &= sums[v] == target
        row["ok"] = any(sums[v] == target for v in E_PRIME_VARIANTS)
        rows.append(row)
    for v in E_PRIME_VARIANTS:
        variant_ok[v] &= mismatch[v] == 0
    winners = [v for v in E_PRIME_VARIANTS if variant_ok[v]]
    return Report(
        "closed-form T~_j coefficients vs direct lattice sums",
        {"lattice": [list(r) for r in L.gram], "p": p, "n": n, "j": j, "bound": bound, "chi": chi},
        rows,
        "derivation" in winners,
        {
            "omegas_checked": n_omega,
            "per_omega_mismatches": mismatch,
            "e_prime_variants_matching": winners,
            "e_prime_variants_failing": [v for v in E_PRIME_VARIANTS if not variant_ok[v]],
            "e_prime_exponent_used": "t(t-1)/2",
        },
    )


def dual_path_b(L: IntegralLattice, p: int, n: int, j: int, bound: int) -> Report:
    """Closed-form neighbour sums b_j against explicit K_j containment counts."""
    chi = L.character_at(p)
    _check_neighbor_range(L.k, j, chi)
    if j < 1:
        raise IndexOutOfRange("j must be at least 1")
    Ks = enumerate_Kj(L, p, j)
    A = L.matrix()
    rows = []
    closed_cache: dict = {}
    prof_cache: dict = {}
    mismatches = 0
    n_omega = 0
    for cls in _classes(n, bound):
        Ys = L.representations(p * p * cls.matrix())
        closed_sum = Fraction(0)
        direct_sum = 0
        if len(Ys):
            inside = np.zeros(len(Ys), dtype=np.int64)
            for K in Ks:
                adj, den = _adjugate(K.frame)
                inside += ~((np.einsum("ab,mbn->man", adj, Ys) % den).reshape(len(Ys), -1).any(axis=1))
            for key, direct in zip(_profile_keys(A, Ys, p, prof_cache), inside.tolist()):
                if key not in closed_cache:
                    r0, r1, r2, wd = _profile_from_key(key)
                    prof = OmegaProfile(r0, r1, r2, space_from_class(wd, p))
                    closed_cache[key] = b_j_closed(prof, L.k, n, j, p, chi)
                mismatches += closed_cache[key] != direct
                closed_sum += closed_cache[key]
                direct_sum += direct
        n_omega += len(Ys)
        rows.append({
            "class_gram": [list(r) for r in cls.rep],
            "trace": cls.trace,
            "omegas": len(Ys),
            "closed": format_rational(closed_sum),
            "direct": format_rational(Fraction(direct_sum)),
            "ok": closed_sum == direct_sum,
        })
    return Report(
        "closed-form neighbour sums vs explicit K_j",
        {"lattice": [list(r) for r in L.gram], "p": p, "n": n, "j": j, "bound": bound, "chi": chi},
        rows,
        mismatches == 0 and all(r["ok"] for r in rows),
        {"omegas_checked": n_omega, "per_omega_mismatches": mismatches, "neighbors": len(Ks)},
    )


def verify_commutation(L: IntegralLattice, p: int, j: int, n: int, bound: int) -> Report:
    """theta(L) | T'_j(p^2) against sum_q v_q(j) sum_{K_(j-q)} theta(K_(j-q))."""
    chi = L.character_at(p)
    _check_neighbor_range(L.k, j, chi)
    if j < 1:
        raise IndexOutOfRange("j must be at least 1")
    if j > n:
        raise IndexOutOfRange(f"j = {j} exceeds the degree n = {n}")
    ctx = HeckeContext.for_lattice(L, p)
    lhs = apply_Tprime(theta_series(L, n), ctx, p, j, bound)
    terms = []
    counts = {}
    for q in range(j + 1):
        Ks = enumerate_Kj(L, p, j - q)
        counts[j - q] = len(Ks)
        c = v_coeff(p, L.k, n, j, q, chi)
        if c == 0:
            continue
        for K in Ks:
            terms.append((c, theta_coefficients(K.lattice(), n, bound)))
    rhs = FourierMap.linear_combination(terms, n, L.k, bound)
    rows = _delta_rows(lhs, rhs)
    return Report(
        "T'_j as a combination of neighbour theta series",
        {"lattice": [list(r) for r in L.gram], "p": p, "n": n, "j": j, "bound": bound, "chi": chi},
        rows,
        all(r["ok"] for r in rows),
        {"neighbors_by_j": {str(a): b for a, b in sorted(counts.items())}},
    )


def _check_genus(genus: list) -> None:
    L0 = genus[0][0]
    for L, _ in genus[1:]:
        if (L.rank, L.level, L.discriminant) != (L0.rank, L0.level, L0.discriminant):
            raise MixedGenus("representatives differ in rank, level or discriminant")


def genus_average(genus: list, n: int, bound: int) -> FourierMap:
    """sum w_i theta(L_i); weights default to 1/#O(L_i) when given as None."""
    terms = []
    for L, w in genus:
        if w is None:
            w = Fraction(1, aut_order(L.gram)) if len(genus) > 1 else Fraction(1)
        terms.append((w, theta_coefficients(L, n, bound)))
    return FourierMap.linear_combination(terms, n, genus[0][0].k, bound)


def verify_eigenform(genus: list, p: int, n: int, bound: int, mode: str = "tprime", j: int = 1) -> Report:
    """Apply T'_j(p^2), T(p)^2 or T(p) to the genus average and compare with the predicted scalar.

    ``genus`` is a list of (lattice, weight) pairs; weight None means 1/#O(L).
    """
    if not genus:
        raise ValueError("genus needs at least one representative")
    genus = [(g, None) if isinstance(g, IntegralLattice) else g for g in genus]
    _check_genus(genus)
    L = genus[0][0]
    chis = {g.character_at(p) for g, _ in genus}
    if len(chis) != 1:
        raise MixedGenus("representatives disagree on the character at p")
    chi = chis.pop()
    k = L.k
    ctx = HeckeContext.for_lattice(L, p)
    factor = p if mode == "tp" else p * p
    avg = genus_average(genus, n, factor * bound)
    if mode == "tprime":
        lam = eigenvalue_lambda_j(p, k, n, j, chi)
        out = apply_Tprime(avg, ctx, p, j, bound)
    elif mode == "tp2":
        lam = delta(p, k - 1, n) ** 2 if chi == 1 else mu(p, k - 1, n) ** 2
        out = apply_Tp_squared(avg, ctx, p, bound, route="twice")
    elif mode == "tp":
        if chi != 1:
            raise IndexOutOfRange("the T(p) eigenvalue is only predicted for chi(p) = +1")
        lam = delta(p, k - 1, n)
        out = apply_Tp(avg, ctx, p, bound)
    else:
        raise ValueError("mode must be 'tprime', 'tp2' or 'tp'")
    rows = _delta_rows(out, avg.truncate(bound).scale(lam))
    ratio = out.ratio_to(avg.truncate(bound))
    notes = {"predicted": format_rational(lam), "observed_ratio": None if ratio is None else format_rational(ratio)}
    passed = all(r["ok"] for r in rows)
    if mode == "tp2":
        # the T~ expansion is a second route; it is asserted only for chi(p) = -1
        expansion = apply_Tp_squared(avg, ctx, p, bound, route="expansion", sign="chi")
        agree = expansion.equals(out)
        notes["expansion_route_agrees"] = agree
        notes["expansion_sign"] = "chi(p)^(n-j)"
        if chi == -1:
            passed = passed and agree
    return Report(
        f"eigenvalue of {mode} on the genus theta series",
        {"lattices": [[list(r) for r in g.gram] for g, _ in genus], "p": p, "n": n, "j": j,
         "bound": bound, "chi": chi, "mode": mode},
        rows,
        passed,
        notes,
    )


def verify_vanishing(L: IntegralLattice, p: int, j: int, n: int, bound: int) -> Report:
    """theta(L) | T'_j(p^2) should vanish beyond the neighbour range (j > k, or j >= k for chi = -1)."""
    chi = L.character_at(p)
    k = L.k
    lo = k + 1 if chi == 1 else k
    if not lo <= j <= n or n > 2 * k:
        raise IndexOutOfRange(f"need {lo} <= j <= n <= 2k")
    ctx = HeckeContext.for_lattice(L, p)
    out = apply_Tprime(theta_series(L, n), ctx, p, j, bound)
    zero = FourierMap(n, k, bound, {})
    rows = _delta_rows(out, zero)
    return Report(
        "T'_j annihilates theta(L) beyond the neighbour range",
        {"lattice": [list(r) for r in L.gram], "p": p, "n": n, "j": j, "bound": bound, "chi": chi},
        rows,
        all(r["ok"] for r in rows),
        {"nonzero_classes": sum(not r["ok"] for r in rows)},
    )


def verify_operator_identity(which: str, L: IntegralLattice, p: int, n: int, bound: int, index: int) -> Report:
    """Both sides of the T~ recursion (``prop31``) or the T~/T' inversion (``prop32``) on theta(L)."""
    ctx = HeckeContext.for_lattice(L, p)
    lhs, rhs = operator_identity_check(which, theta_series(L, n), ctx, p, bound, index)
    rows = _delta_rows(lhs, rhs)
    return Report(
        f"operator identity {which}",
        {"lattice": [list(r) for r in L.gram], "p": p, "n": n, "index": index, "bound": bound,
         "chi": ctx.chi},
        rows,
        all(r["ok"] for r in rows),
    )
