from fractions import Fraction

import pytest

import thetahecke.qanalog as qanalog
from thetahecke import identities


@pytest.fixture
def broken_beta(monkeypatch):
    """Off-by-one Gaussian binomial: every grid should notice."""
    real = qanalog.beta

    def beta(p, m, r):
        v = real(p, m, r)
        return v + 1 if r == 2 and m >= 3 else v

    monkeypatch.setattr(qanalog, "beta", beta)
    return beta


def test_lemma42_small_grid():
    rep = identities.lemma42_grid(primes=(2, 3), m_max=3, y_range=(-2, 2), ab_max=2)
    assert rep.passed and rep.rows
    assert rep.notes["d_weight_used"] == "p^(q(q-1)/2)"


def test_auxiliary_small_grid():
    assert identities.auxiliary_identities(primes=(2, 3), m_range=(-2, 3), r_max=3).passed


def test_phi_oracle_small():
    assert identities.phi_oracle(primes=(2, 3), max_dim=4, max_ell=2).passed


def test_reduction_small():
    assert identities.reduction_grid(primes=(2,), max_dim=2, t_range=(-1, 1), max_ell=2).passed


def test_char2_small():
    rep = identities.char2_structure(exhaustive_dim=3, samples={4: 200})
    assert rep.passed


def test_lemma42_detects_mutation(broken_beta):
    rep = identities.lemma42_grid(primes=(2,), m_max=4, y_range=(-1, 2), ab_max=2)
    assert not rep.passed
    assert rep.failing()


def test_auxiliary_detects_mutation(broken_beta):
    assert not identities.auxiliary_identities(primes=(3,), m_range=(0, 5), r_max=3).passed


def test_rows_are_exact():
    rep = identities.lemma42_grid(primes=(3,), m_max=2, y_range=(0, 1), ab_max=1)
    for r in rep.rows:
        assert Fraction(r["lhs"]) == Fraction(r["rhs"])


def test_unknown_suite():
    with pytest.raises((KeyError, ValueError)):
        identities.run_suite("nope")
