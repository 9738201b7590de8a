"""Exact q-analog products evaluated at a prime.

All three products use the convention that an empty product (``r == 0``)
equals 1, and all of them accept negative or zero ``m``, in which case
the factors ``p**(m - i) +- 1`` are genuine fractions.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

__all__ = [
    "delta",
    "mu",
    "beta",
    "ppow",
    "lemma42_sum",
    "lemma42_closed",
    "D_WEIGHTS",
]


def ppow(p: int, e: int) -> Fraction:
    """``p**e`` as an exact rational, valid for negative ``e``."""
    if e >= 0:
        return Fraction(p**e)
    return Fraction(1, p ** (-e))


def _check(p: int, r: int) -> None:
    if p < 2:
        raise ValueError(f"p must be a prime >= 2, got {p}")
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")


@lru_cache(maxsize=None)
def delta(p: int, m: int, r: int) -> Fraction:
    """prod_{i<r} (p^(m-i) + 1)."""
    _check(p, r)
    out = Fraction(1)
    for i in range(r):
        out *= ppow(p, m - i) + 1
    return out


@lru_cache(maxsize=None)
def mu(p: int, m: int, r: int) -> Fraction:
    """prod_{i<r} (p^(m-i) - 1)."""
    _check(p, r)
    out = Fraction(1)
    for i in range(r):
        out *= ppow(p, m - i) - 1
    return out


@lru_cache(maxsize=None)
def beta(p: int, m: int, r: int) -> Fraction:
    """Gaussian binomial mu(m, r) / mu(r, r).

    For ``0 <= r <= m`` this is the number of r-dimensional subspaces of
    F_p^m; it vanishes for ``0 <= m < r``.
    """
    _check(p, r)
    return mu(p, m, r) / mu(p, r, r)


_REQUIRED = {
    "a": ("m", "y"),
    "b": ("a", "m", "y"),
    "c": ("a", "m", "y"),
    "d": ("a", "b", "m"),
}


def _params(variant: str, params: dict) -> tuple:
    if variant not in _REQUIRED:
        raise ValueError(f"unknown variant {variant!r}; expected one of a, b, c, d")
    missing = [k for k in _REQUIRED[variant] if params.get(k) is None]
    if missing:
        raise ValueError(f"variant {variant} needs parameter(s) {', '.join(missing)}")
    if params["m"] < 1:
        raise ValueError("m must be >= 1")
    if variant != "a" and params["a"] < 1:
        raise ValueError("a must be >= 1")
    return tuple(params[k] for k in _REQUIRED[variant])


D_WEIGHTS = ("derivation", "statement")


def lemma42_sum(p: int, variant: str, params: dict, form: str = "mu", d_weight: str = "derivation") -> Fraction:
    """Evaluate one of the four alternating q-sums term by term.

    ``variant`` selects the sum:

    * ``a``: sum_q (-1)^q p^(q(q-1)/2 + q y) beta(m, q)
    * ``b``: sum_q (-1)^q p^(q(q+1)/2 + q(y-m)) delta(a-1+q, q) delta(a+y, m-q) beta(m, q)
    * ``c``: sum_q (-1)^q p^(q(q+1)/2 + q(y-m)) beta(a-1+q, q) beta(a+y, m-q)
    * ``d``: sum_q (-1)^q p^(q(q-1)/2) X(a+m-q, m-q) X(b, q) beta(m, q),
      with X = mu (``form="mu"``) or X = delta (``form="delta"``);
      ``d_weight="statement"`` uses p^(q(q+1)/2) instead, which does not
      satisfy the recursion the closed form rests on

    The value is always obtained by literal summation so it can serve as
    an oracle for :func:`lemma42_closed`.
    """
    vals = _params(variant, params)
    total = Fraction(0)
    if variant == "a":
        m, y = vals
        for q in range(m + 1):
            total += (-1) ** q * ppow(p, q * (q - 1) // 2 + q * y) * beta(p, m, q)
    elif variant == "b":
        a, m, y = vals
        for q in range(m + 1):
            total += (
                (-1) ** q
                * ppow(p, q * (q + 1) // 2 + q * (y - m))
                * delta(p, a - 1 + q, q)
                * delta(p, a + y, m - q)
                * beta(p, m, q)
            )
    elif variant == "c":
        a, m, y = vals
        for q in range(m + 1):
            total += (
                (-1) ** q
                * ppow(p, q * (q + 1) // 2 + q * (y - m))
                * beta(p, a - 1 + q, q)
                * beta(p, a + y, m - q)
            )
    else:
        if form not in ("mu", "delta"):
            raise ValueError("form must be 'mu' or 'delta'")
        if d_weight not in D_WEIGHTS:
            raise ValueError(f"d_weight must be one of {D_WEIGHTS}")
        shift = -1 if d_weight == "derivation" else 1
        x = mu if form == "mu" else delta
        a, b, m = vals
        for q in range(m + 1):
            total += (
                (-1) ** q
                * ppow(p, q * (q + shift) // 2)
                * x(p, a + m - q, m - q)
                * x(p, b, q)
                * beta(p, m, q)
            )
    return total


def lemma42_closed(p: int, variant: str, params: dict) -> Fraction:
    """Closed-form value claimed for :func:`lemma42_sum`."""
    vals = _params(variant, params)
    if variant == "a":
        m, y = vals
        return (-1) ** m * mu(p, y + m - 1, m)
    if variant == "b":
        a, m, y = vals
        return (-1) ** m * mu(p, y, m)
    if variant == "c":
        a, m, y = vals
        return mu(p, y, m) / mu(p, m, m)
    a, b, m = vals
    return (-1) ** m * ppow(p, a * m + m * (m + 1) // 2) * mu(p, b - a - 1, m)
