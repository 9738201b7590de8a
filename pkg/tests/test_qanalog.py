import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from thetahecke.qanalog import beta, delta, lemma42_closed, lemma42_sum, mu, ppow

primes = st.sampled_from([2, 3, 5, 7])


def test_delta_examples():
    assert delta(3, 2, 0) == 1
    assert delta(2, 3, 1) == 9
    assert delta(3, 1, 2) == 8


def test_mu_examples():
    assert mu(2, 0, 1) == 0
    assert mu(3, 4, 2) == 2080
    assert mu(2, -1, 1) == Fraction(-1, 2)


def test_beta_examples():
    assert beta(3, 4, 2) == 130
    assert beta(5, 1, 2) == 0


def _subspaces_f2(m, r):
    # independent oracle: distinct spans of r-subsets of nonzero vectors
    vecs = [v for v in itertools.product((0, 1), repeat=m) if any(v)]
    seen = set()
    for combo in itertools.combinations(vecs, r):
        span = {tuple([0] * m)}
        for v in combo:
            span |= {tuple((a + b) % 2 for a, b in zip(s, v)) for s in span}
        if len(span) == 2**r:
            seen.add(frozenset(span))
    return len(seen)


def test_beta_counts_subspaces_of_f2_6():
    assert beta(2, 6, 3) == _subspaces_f2(6, 3) == 1395


def test_values_are_exact_rationals():
    v = delta(3, -2, 3)
    assert isinstance(v, Fraction)
    assert v == (Fraction(1, 9) + 1) * (Fraction(1, 27) + 1) * (Fraction(1, 81) + 1)


def test_negative_r_rejected():
    with pytest.raises(ValueError):
        beta(3, 2, -1)


def test_lemma42_examples():
    assert lemma42_sum(2, "a", {"m": 1, "y": 0}) == 0
    # three-term sum written out: 1 - p^1 beta(2,1) + p^(1+2) beta(2,2), p = 3, y = 1
    assert lemma42_sum(3, "a", {"m": 2, "y": 1}) == 1 - 3 * 4 + 27 == 16 == mu(3, 2, 2)
    d = lemma42_sum(2, "d", {"a": 1, "b": 3, "m": 2})
    assert d == lemma42_closed(2, "d", {"a": 1, "b": 3, "m": 2}) == 0


def test_lemma42_missing_parameter():
    with pytest.raises(ValueError, match="needs parameter"):
        lemma42_sum(3, "d", {"a": 1, "m": 2})
    with pytest.raises(ValueError):
        lemma42_sum(3, "e", {"m": 1})


def test_lemma42_d_alternative_weight_fails():
    prm = {"a": 1, "b": 1, "m": 1}
    assert lemma42_sum(2, "d", prm, d_weight="statement") != lemma42_closed(2, "d", prm)
    assert lemma42_sum(2, "d", prm) == lemma42_closed(2, "d", prm)


@given(primes, st.integers(2, 8), st.data())
def test_pascal(p, m, data):
    q = data.draw(st.integers(1, m - 1))
    assert beta(p, m, q) == ppow(p, q) * beta(p, m - 1, q) + beta(p, m - 1, q - 1)


@given(primes, st.integers(-6, 8), st.integers(-6, 8), st.integers(0, 6))
def test_swap(p, m, m2, r):
    assert beta(p, m, r) * mu(p, m2, r) == beta(p, m2, r) * mu(p, m, r)


@given(primes, st.integers(-6, 8), st.integers(0, 5), st.integers(0, 5))
def test_delta_multiplicative(p, m, r, r2):
    assert delta(p, m, r + r2) == delta(p, m, r2) * delta(p, m - r2, r)


@given(primes, st.integers(1, 8), st.integers(0, 6))
def test_negative_beta(p, t, r):
    assert beta(p, -t, r) == (-1) ** r * ppow(p, -r * t - r * (r - 1) // 2) * beta(p, t + r - 1, r)


@given(primes, st.integers(0, 6), st.integers(0, 8))
def test_beta_vanishes_below(p, m, r):
    if r > m:
        assert beta(p, m, r) == 0
    else:
        assert beta(p, m, r).denominator == 1 and beta(p, m, r) > 0


@given(primes, st.integers(1, 5), st.integers(-3, 5), st.integers(1, 4), st.integers(1, 4))
def test_lemma42_all_variants(p, m, y, a, b):
    for variant, prm in [("a", {"m": m, "y": y}), ("b", {"a": a, "m": m, "y": y}),
                         ("c", {"a": a, "m": m, "y": y}), ("d", {"a": a, "b": b, "m": m})]:
        assert lemma42_sum(p, variant, prm) == lemma42_closed(p, variant, prm)
    assert lemma42_sum(p, "d", {"a": a, "b": b, "m": m}, form="delta") == lemma42_closed(p, "d", {"a": a, "b": b, "m": m})
