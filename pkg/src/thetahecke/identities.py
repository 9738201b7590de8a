"""Grids of exact identity checks for the q-analog functions and F_p spaces.

Every suite returns a :class:`~thetahecke.closed_forms.Report` whose rows
hold ``identity``, ``params``, ``lhs``, ``rhs`` and ``ok``.  The q-analog
functions are looked up on the :mod:`qanalog` module at call time, so a
test can swap in a corrupted implementation and watch the suite fail.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from . import modp, qanalog
from .closed_forms import Report
from .fourier import format_rational
from .fqspace import (
    AnisotropicSpace,
    FqQuadSpace,
    Residual,
    Subspace,
    UndefinedComposition,
    WittDecomposition,
    _artin_schreier_image,
    _span_vectors,
    aniso_plane,
    complement_class,
    compose_class,
    decompose,
    find_isotropic,
    hyperbolic_mate,
    hyperbolic_pair,
    hyperbolic_space,
    line_space,
    orthogonal_complement,
    orthogonal_sum,
    phi_brute,
    phi_general,
    phi_regular,
    plane_normal_basis,
    radical,
    reduction_rhs,
    split_anisotropic_vector,
    totally_isotropic_subspaces,
    zero_space,
)

__all__ = [
    "SUITES",
    "auxiliary_identities",
    "char2_structure",
    "lemma42_grid",
    "phi_oracle",
    "random_basis_change",
    "reduction_grid",
    "run_suite",
    "witt_types",
]

PRIMES = (2, 3, 5)


def _row(identity: str, params: dict, lhs, rhs) -> dict:
    fmt = lambda v: format_rational(v) if isinstance(v, (Fraction, int)) else str(v)
    return {"identity": identity, "params": params, "lhs": fmt(lhs), "rhs": fmt(rhs), "ok": lhs == rhs}


def _report(check: str, params: dict, rows: list, notes: dict | None = None) -> Report:
    return Report(check, params, rows, all(r["ok"] for r in rows), notes or {})


# ------------------------------------------------------------------ q-analog grids


def lemma42_grid(primes=PRIMES, m_max: int = 5, y_range=(-3, 5), ab_max: int = 4) -> Report:
    """Literal sums against closed forms for the four alternating q-sums.

    Variant d is summed with the weight p^(q(q-1)/2); the notes count how
    often the alternative weight p^(q(q+1)/2) misses the closed form.
    """
    rows = []
    alt_weight_failures = 0
    for p in primes:
        for m in range(1, m_max + 1):
            for y in range(y_range[0], y_range[1] + 1):
                prm = {"p": p, "m": m, "y": y}
                rows.append(_row("lemma42a", prm, qanalog.lemma42_sum(p, "a", prm),
                                 (-1) ** m * qanalog.mu(p, y + m - 1, m)))
                for a in range(1, ab_max + 1):
                    prm = {"p": p, "a": a, "m": m, "y": y}
                    rows.append(_row("lemma42b", prm, qanalog.lemma42_sum(p, "b", prm),
                                     (-1) ** m * qanalog.mu(p, y, m)))
                    rows.append(_row("lemma42c", prm, qanalog.lemma42_sum(p, "c", prm),
                                     qanalog.mu(p, y, m) / qanalog.mu(p, m, m)))
            for a in range(1, ab_max + 1):
                for b in range(1, ab_max + 1):
                    prm = {"p": p, "a": a, "b": b, "m": m}
                    closed = (-1) ** m * qanalog.ppow(p, a * m + m * (m + 1) // 2) * qanalog.mu(p, b - a - 1, m)
                    for form in ("mu", "delta"):
                        rows.append(_row(f"lemma42d_{form}", prm, qanalog.lemma42_sum(p, "d", prm, form), closed))
                        if qanalog.lemma42_sum(p, "d", prm, form, d_weight="statement") != closed:
                            alt_weight_failures += 1
    return _report("alternating q-sums against their closed forms",
                   {"primes": list(primes), "m_max": m_max, "y_range": list(y_range), "ab_max": ab_max}, rows,
                   {"d_weight_used": "p^(q(q-1)/2)",
                    "d_weight_p^(q(q+1)/2)_failures": alt_weight_failures})


def auxiliary_identities(primes=PRIMES, m_range=(-3, 5), r_max: int = 5) -> Report:
    """Pascal recursion, the beta/mu swap, delta multiplicativity, negative beta."""
    beta, mu, delta, ppow = qanalog.beta, qanalog.mu, qanalog.delta, qanalog.ppow
    lo, hi = m_range
    rows = []
    for p in primes:
        for m in range(1, hi + 1):
            for q in range(1, m):
                rows.append(_row("pascal", {"p": p, "m": m, "q": q}, beta(p, m, q),
                                 ppow(p, q) * beta(p, m - 1, q) + beta(p, m - 1, q - 1)))
        for m in range(lo, hi + 1):
            for m2 in range(lo, hi + 1):
                for r in range(r_max + 1):
                    rows.append(_row("swap", {"p": p, "m": m, "m2": m2, "r": r},
                                     beta(p, m, r) * mu(p, m2, r), beta(p, m2, r) * mu(p, m, r)))
            for r in range(r_max + 1):
                for r2 in range(r_max + 1 - r):
                    rows.append(_row("delta_mult", {"p": p, "m": m, "r": r, "r2": r2},
                                     delta(p, m, r + r2), delta(p, m, r2) * delta(p, m - r2, r)))
        for t in range(1, hi + 1):
            for r in range(r_max + 1):
                rows.append(_row("negative_beta", {"p": p, "t": t, "r": r}, beta(p, -t, r),
                                 (-1) ** r * ppow(p, -r * t - r * (r - 1) // 2) * beta(p, t + r - 1, r)))
        for m in range(0, hi + 1):
            for r in range(m + 1):
                rows.append(_row("beta_counts_subspaces", {"p": p, "m": m, "r": r}, beta(p, m, r),
                                 _count_subspaces(p, m, r)))
    return _report("auxiliary q-analog identities", {"primes": list(primes), "m_range": list(m_range),
                                                     "r_max": r_max}, rows)


def _count_subspaces(p: int, m: int, r: int) -> int:
    """r-subspaces of F_p^m, counted as reduced echelon forms."""
    if p ** (m * r) > 10**6:
        # sum over pivot sets of p^(free entries)
        return sum(p ** sum(m - pv - (r - i) for i, pv in enumerate(piv))
                   for piv in itertools.combinations(range(m), r))
    return len(totally_isotropic_subspaces(zero_space(p, m), r, limit=None))


# ------------------------------------------------------------------ F_p space grids


def witt_types(p: int, dim: int, max_rad: int = 2) -> list:
    """Every isometry type of dimension ``dim`` with radical dimension <= max_rad.

    Odd p has two classes of anisotropic line; both are returned as spaces.
    """
    out = []
    for r in range(min(max_rad, dim) + 1):
        reg = dim - r
        t, odd = divmod(reg, 2)
        if odd:
            values = [1] if p == 2 else [1, _nonsquare(p)]
            for v in values:
                out.append(orthogonal_sum(zero_space(p, r), hyperbolic_space(p, t), line_space(p, v)))
        else:
            out.append(orthogonal_sum(zero_space(p, r), hyperbolic_space(p, t)))
            if t >= 1:
                out.append(orthogonal_sum(zero_space(p, r), hyperbolic_space(p, t - 1), aniso_plane(p)))
    return out


def _nonsquare(p: int) -> int:
    return next(e for e in range(2, p) if pow(e, (p - 1) // 2, p) == p - 1)


def random_basis_change(V: FqQuadSpace, rng) -> FqQuadSpace:
    """The same space written in a random basis."""
    p, d = V.p, V.dim
    if d == 0:
        return V
    while True:
        g = rng.integers(0, p, size=(d, d))
        if modp.rank(g, p) == d:
            return V.restrict(g)


def random_space(p: int, dim: int, rng) -> FqQuadSpace:
    return FqQuadSpace(p, np.triu(rng.integers(0, p, size=(dim, dim))))


def phi_oracle(primes=PRIMES, max_dim: int = 6, max_ell: int = 3, max_rad: int = 2,
               random_per_dim: int = 4, seed: int = 0) -> Report:
    """Closed-form isotropic-subspace counts against echelon enumeration."""
    rng = np.random.default_rng(seed)
    rows = []
    for p in primes:
        for dim in range(max_dim + 1):
            spaces = [(V, "type") for V in witt_types(p, dim, max_rad)]
            spaces += [(random_space(p, dim, rng), "random") for _ in range(random_per_dim)]
            for V0, origin in spaces:
                V = random_basis_change(V0, rng) if origin == "type" else V0
                wd = decompose(V)
                if wd.rad_dim > max_rad:
                    continue
                for ell in range(max_ell + 1):
                    brute = phi_brute(V, ell, limit=None)
                    prm = {"p": p, "dim": dim, "type": list(wd.as_tuple()), "ell": ell, "origin": origin}
                    rows.append(_row("phi_general", prm, phi_general(V, ell), brute))
                    if wd.regular:
                        rows.append(_row("phi_regular", prm, phi_regular(wd, ell, p), brute))
    return _report("isotropic subspace counts against enumeration",
                   {"primes": list(primes), "max_dim": max_dim, "max_ell": max_ell, "max_rad": max_rad,
                    "seed": seed}, rows)


def _class_space(wd: WittDecomposition, p: int) -> FqQuadSpace:
    parts = [zero_space(p, wd.rad_dim), hyperbolic_space(p, wd.hyp_count)]
    if wd.residual is Residual.LINE:
        parts.append(line_space(p))
    elif wd.residual is Residual.ANISO_PLANE:
        parts.append(aniso_plane(p))
    return orthogonal_sum(*parts)


def reduction_grid(primes=(2, 3), max_dim: int = 4, t_range=(-2, 2), max_ell: int = 3, seed: int = 0) -> Report:
    """Hyperbolic and anisotropic cancellation sums against brute-force counts.

    U runs over every type of dimension <= max_dim (any radical).  The
    left side is counted in an explicit space of type U + H^t (+ A); for
    negative t that space is U with the planes actually removed.
    """
    rng = np.random.default_rng(seed)
    rows = []
    skipped = 0
    for p in primes:
        for d in range(max_dim + 1):
            for U in witt_types(p, d, max_rad=d):
                ut = decompose(U)
                for variant in ("a", "b"):
                    for t in range(t_range[0], t_range[1] + 1):
                        try:
                            target = compose_class(ut, t, aniso=variant == "b")
                        except UndefinedComposition:
                            skipped += 1
                            continue
                        if t >= 0:
                            parts = [U, hyperbolic_space(p, t)] + ([aniso_plane(p)] if variant == "b" else [])
                            W = orthogonal_sum(*parts)
                        else:
                            W = _class_space(target, p)
                        W = random_basis_change(W, rng)
                        for ell in range(max_ell + 1):
                            prm = {"p": p, "U": list(ut.as_tuple()), "t": t, "ell": ell, "variant": variant}
                            rows.append(_row(f"reduction_{variant}", prm, reduction_rhs(ut, t, ell, p, variant),
                                             phi_brute(W, ell, limit=None)))
    return _report("cancellation sums against brute-force counts",
                   {"primes": list(primes), "max_dim": max_dim, "t_range": list(t_range), "max_ell": max_ell,
                    "seed": seed}, rows, {"undefined_compositions_skipped": skipped})


# ------------------------------------------------------------------ characteristic 2 structure


class _Tally:
    """Counts cases per property and keeps the first few failures."""

    def __init__(self):
        self.cases: dict = {}
        self.failures: dict = {}

    def check(self, name: str, ok: bool, example=None):
        self.cases[name] = self.cases.get(name, 0) + 1
        if not ok:
            fails = self.failures.setdefault(name, [])
            if len(fails) < 5:
                fails.append(example)

    def rows(self) -> list:
        out = []
        for name in sorted(self.cases):
            bad = self.failures.get(name, [])
            out.append({"identity": name, "params": {"cases": self.cases[name]},
                        "lhs": str(len(bad)), "rhs": "0", "ok": not bad,
                        "examples": [str(e) for e in bad]})
        return out


def _span_rank(rows, p: int) -> int:
    rows = np.asarray(rows, dtype=np.int64)
    return modp.rank(rows, p) if rows.size else 0


def _same_span(a, b, p: int) -> bool:
    ra, rb = _span_rank(a, p), _span_rank(b, p)
    return ra == rb == _span_rank(np.vstack([a, b]), p)


def _is_hyperbolic_plane(V: FqQuadSpace, basis) -> bool:
    wd = decompose(V.restrict(basis))
    return wd.as_tuple() == (0, 1, "ZERO")


def _brute_radical_size(V: FqQuadSpace) -> int:
    vecs = _span_vectors(np.eye(V.dim, dtype=np.int64), V.p)
    pol = V.polar_matrix()
    ok = (V.q(vecs) == 0) & ~((vecs @ pol % V.p).any(axis=1))
    return int(ok.sum())


def _check_space(V: FqQuadSpace, rng, tally: _Tally, with_phi: bool) -> None:
    p, d = V.p, V.dim
    key = V.coeffs.tolist()
    rad = radical(V)
    tally.check("radical", p ** rad.dim == _brute_radical_size(V), key)
    wd = decompose(V)
    tally.check("witt_dimension", wd.dim == d, key)
    # a space with an orthogonal basis is regular only in dimension 1
    if d and not np.triu(V.polar_matrix(), 1).any():
        tally.check("orthogonal_basis_regular_only_in_dim_1", wd.regular == (d == 1 and V.q(np.ones(1)) == 1), key)
    if not wd.regular or d == 0:
        return
    eye = np.eye(d, dtype=np.int64)
    # regular spaces of dimension >= 3 are isotropic
    if d >= 3:
        try:
            v = find_isotropic(V)
            tally.check("dim3_isotropic", V.q(v) == 0 and v.any(), key)
        except AnisotropicSpace:
            tally.check("dim3_isotropic", False, key)
    vecs = _span_vectors(eye, p)[1:]
    iso = vecs[V.q(vecs) == 0]
    aniso = vecs[V.q(vecs) != 0]
    # a random isotropic vector lies in a splitting hyperbolic plane
    if len(iso):
        x = iso[rng.integers(len(iso))]
        x, y = hyperbolic_pair(V, x, eye)
        plane = np.vstack([x, y])
        rest = _split_rest(V, x, y)
        pol = V.polar_matrix()
        ok = (_is_hyperbolic_plane(V, plane) and not (rest @ pol @ plane.T % p).any()
              and _span_rank(np.vstack([plane, rest]), p) == d)
        tally.check("isotropic_vector_in_splitting_plane", ok, key)
        # the complement of a hyperbolic plane is regular, hyperbolic iff V is
        if d > 2:
            ct = decompose(V.restrict(rest))
            tally.check("hyperbolic_cancellation", ct.regular and ct.dim == d - 2
                        and ct.hyperbolic == wd.hyperbolic and ct.residual is wd.residual, key)
    # an anisotropic vector in a regular isotropic even space lies in a splitting hyperbolic plane
    if d % 2 == 0 and len(iso) and len(aniso):
        v = aniso[rng.integers(len(aniso))]
        plane, rest = split_anisotropic_vector(V, v)
        pol = V.polar_matrix()
        vperp = orthogonal_complement(V, Subspace(V, v.reshape(1, -1))).basis
        ok = (_is_hyperbolic_plane(V, plane) and _same_span(plane[:1], v.reshape(1, -1), p)
              and not (rest.size and (rest @ pol @ plane.T % p).any())
              and _same_span(np.vstack([v.reshape(1, -1), rest]), vperp, p))
        tally.check("anisotropic_vector_in_splitting_plane", ok, key)
    # an anisotropic subplane splits V and flips hyperbolicity in even dimension
    if d >= 2:
        W = _random_subplane(V, rng, anisotropic=True)
        if W is not None:
            comp = orthogonal_complement(V, Subspace(V, W)).basis
            ct = decompose(V.restrict(comp)) if comp.size else WittDecomposition(0, 0, Residual.ZERO)
            ok = ct.regular and ct.dim == d - 2 and _span_rank(np.vstack([W, comp]) if comp.size else W, p) == d
            if d % 2 == 0:
                ok = ok and ct.hyperbolic != wd.hyperbolic
            tally.check("anisotropic_plane_cancellation", ok, key)
    # totally isotropic subspaces of dim <= 2 have hyperbolic mates
    if len(iso):
        pol = V.polar_matrix()
        x = iso[rng.integers(len(iso))]
        partners = iso[(iso @ pol @ x % p == 0) & (iso != x).any(axis=1)]
        for R in [x.reshape(1, -1)] + ([np.vstack([x, partners[rng.integers(len(partners))]])] if len(partners) else []):
            r = R.shape[0]
            mate = hyperbolic_mate(V, Subspace(V, R))
            both = np.vstack([R, mate])
            ok = _span_rank(both, p) == 2 * r and decompose(V.restrict(both)).as_tuple() == (0, r, "ZERO")
            tally.check("hyperbolic_mate", ok, key)
    # class of U-perp predicted from the class of U
    if d % 2 == 0:
        k = int(rng.integers(0, d + 1))
        U = _random_subspace(V, k, rng)
        lit = orthogonal_complement(V, U)
        tally.check("complement_class", complement_class(V, U) == decompose(lit.form()), key)
    if with_phi:
        for ell in range(1, 4):
            tally.check("count_formula", phi_regular(wd, ell, p) == phi_brute(V, ell, limit=None), key)
        tally.check("isotropic_vector_count", (p - 1) * phi_regular(wd, 1, p) == len(iso), key)


def _split_rest(V: FqQuadSpace, x, y) -> np.ndarray:
    """z' = z + b(z, y) x + b(z, x) y over a completion of (x, y)."""
    p, d = V.p, V.dim
    pol = V.polar_matrix()
    extra = modp.extend_to_basis(np.vstack([x, y]), d, p)
    if extra.shape[0] == 0:
        return np.zeros((0, d), dtype=np.int64)
    return (extra - np.outer(extra @ pol @ y % p, x) - np.outer(extra @ pol @ x % p, y)) % p


def _random_subspace(V: FqQuadSpace, k: int, rng) -> Subspace:
    d, p = V.dim, V.p
    while True:
        b = rng.integers(0, p, size=(k, d))
        if k == 0 or modp.rank(b, p) == k:
            return Subspace(V, b.reshape(k, d))


def _random_subplane(V: FqQuadSpace, rng, anisotropic: bool):
    for _ in range(20):
        b = rng.integers(0, V.p, size=(2, V.dim))
        if modp.rank(b, V.p) < 2:
            continue
        wd = decompose(V.restrict(b))
        if wd.regular and (wd.residual is Residual.ANISO_PLANE) == anisotropic:
            return b
    return None


def char2_structure(exhaustive_dim: int = 4, samples=None, seed: int = 0) -> Report:
    """Constructive checks of the characteristic 2 structure theory.

    Every form of dimension <= ``exhaustive_dim`` is visited; ``samples``
    maps larger dimensions to a number of random forms.
    """
    samples = {5: 4000, 6: 10000} if samples is None else samples
    rng = np.random.default_rng(seed)
    tally = _Tally()
    p = 2
    for d in range(1, exhaustive_dim + 1):
        n_coeff = d * (d + 1) // 2
        idx = np.triu_indices(d)
        for bits in itertools.product((0, 1), repeat=n_coeff):
            c = np.zeros((d, d), dtype=np.int64)
            c[idx] = bits
            _check_space(FqQuadSpace(2, c), rng, tally, with_phi=True)
    for d, count in sorted(samples.items()):
        for i in range(count):
            # the count formula is the slow part; run it on a tenth of the samples
            _check_space(random_space(2, d, rng), rng, tally, with_phi=i % 10 == 0)
    _plane_normal_forms(tally)
    _cancellation_by_summand(tally, rng)
    return _report("characteristic 2 structure theory",
                   {"exhaustive_dim": exhaustive_dim, "samples": {str(k): v for k, v in sorted(samples.items())},
                    "seed": seed}, tally.rows(), {"cases": sum(tally.cases.values())})


def _plane_normal_forms(tally: _Tally) -> None:
    """Every regular plane over F_2: normal basis exists, hyperbolic iff q(y) in H."""
    H = _artin_schreier_image(2)
    for bits in itertools.product((0, 1), repeat=3):
        V = FqQuadSpace(2, [[bits[0], bits[1]], [0, bits[2]]])
        if not decompose(V).regular:
            continue
        x, y = plane_normal_basis(V, [1, 0], [0, 1])
        found = V.q(x) == 1 and V.polar(x, y) == 1
        tally.check("plane_normal_basis", found, V.coeffs.tolist())
        vecs = _span_vectors(np.eye(2, dtype=np.int64), 2)[1:]
        brute_hyp = bool((V.q(vecs) == 0).any())
        tally.check("plane_hyperbolic_iff_in_H", brute_hyp == (V.q(y) in H), V.coeffs.tolist())
    A = aniso_plane(2)
    tally.check("aniso_sum_is_hyperbolic", decompose(orthogonal_sum(A, A)).as_tuple() == (0, 2, "ZERO"), "A+A")


def _cancellation_by_summand(tally: _Tally, rng) -> None:
    """H + W and A + W against W for every form W of dimension <= 4; shifted hyperbolic planes."""
    H, A = hyperbolic_space(2, 1), aniso_plane(2)
    for d in range(0, 5):
        idx = np.triu_indices(d)
        for bits in itertools.product((0, 1), repeat=d * (d + 1) // 2):
            c = np.zeros((d, d), dtype=np.int64)
            c[idx] = bits
            W = FqQuadSpace(2, c)
            wt = decompose(W)
            ht = decompose(orthogonal_sum(H, W))
            tally.check("hyperbolic_summand", ht.hyp_count == wt.hyp_count + 1 and ht.residual is wt.residual
                        and ht.rad_dim == wt.rad_dim, c.tolist())
            if wt.regular and d % 2 == 0:
                at = decompose(orthogonal_sum(A, W))
                tally.check("anisotropic_summand_flips", at.regular and at.hyperbolic != wt.hyperbolic, c.tolist())
            if d:
                # V = H + W, z in W, W' = F(x + z) + F y is hyperbolic with complement isometric to W
                V = orthogonal_sum(H, W)
                z = np.concatenate([[0, 0], rng.integers(0, 2, size=d)])
                x = np.eye(d + 2, dtype=np.int64)[0]
                y = np.eye(d + 2, dtype=np.int64)[1]
                x2 = (x + z) % 2
                plane = np.vstack([x2, y])
                comp = orthogonal_complement(V, Subspace(V, plane)).basis
                ok = _is_hyperbolic_plane(V, plane) and decompose(V.restrict(comp)) == wt
                tally.check("shifted_hyperbolic_plane", ok, (c.tolist(), z.tolist()))


# ------------------------------------------------------------------ registry


SUITES = {
    "lemma42": lemma42_grid,
    "qanalog": auxiliary_identities,
    "phi": phi_oracle,
    "reduction": reduction_grid,
    "char2": char2_structure,
}


def run_suite(name: str, **kwargs) -> Report:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}")
    return SUITES[name](**kwargs)
