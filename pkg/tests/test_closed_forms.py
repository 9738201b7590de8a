from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetahecke.closed_forms import (
    IndexOutOfRange,
    MixedGenus,
    NotInOverlattice,
    _profile_keys,
    _profile_scaled,
    b_j_closed,
    c_tilde_closed,
    dual_path_b,
    dual_path_c_tilde,
    eigenvalue_lambda_j,
    enumerate_Kj,
    omega_profile,
    verify_commutation,
    verify_eigenform,
)
from thetahecke.fqspace import decompose, phi_brute
from thetahecke.lattice import IntegralLattice
from thetahecke.qanalog import beta, delta, ppow


def test_omega_profile_examples(D4):
    assert omega_profile(D4, np.eye(4, dtype=int)[:, :2], 3).key()[:3] == (0, 2, 0)
    assert omega_profile(D4, [[Fraction(1, 3)], [0], [0], [0]], 3).key()[:3] == (1, 0, 0)
    assert omega_profile(D4, [[3], [0], [0], [0]], 3).key()[:3] == (0, 0, 1)
    with pytest.raises(NotInOverlattice):
        omega_profile(D4, [[Fraction(1, 9)], [0], [0], [0]], 3)


def test_omega_profile_quotient_type(D4):
    # Omega = L itself: its image in L/pL is the whole regular space
    prof = omega_profile(D4, np.eye(4, dtype=int), 3)
    assert prof.witt == decompose(D4.mod_p_space(3))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([("d4", 3), ("d4", 5), ("a1a1", 3), ("a1a1", 5)]), st.integers(1, 2),
       st.integers(0, 10**6))
def test_profile_kernel_matches_reference(lat_p, n, seed):
    from thetahecke.gramclass import class_inventory
    from tests.conftest import load

    name, p = lat_p
    L = load(name)
    rng = np.random.default_rng(seed)
    classes = class_inventory(n, 4)
    cls = classes[int(rng.integers(len(classes)))]
    Ys = L.representations(p * p * cls.matrix())
    if len(Ys) == 0:
        return
    Ys = Ys[rng.choice(len(Ys), size=min(8, len(Ys)), replace=False)]
    A = L.matrix()
    keys = _profile_keys(A, Ys, p, {})
    for Y, key in zip(Ys, keys):
        assert key == _profile_scaled(A, Y, p).key()


def test_eigenvalue_examples():
    assert eigenvalue_lambda_j(2, 4, 1, 1, 1) == 72
    assert eigenvalue_lambda_j(3, 2, 1, 1, 1) == 12
    # k = 2, n = 2, j = 2: p^(0 + 1) beta(2, 2) delta(1, 2)
    assert eigenvalue_lambda_j(3, 2, 2, 2, 1) == 3 * delta(3, 1, 2)
    with pytest.raises(IndexOutOfRange):
        eigenvalue_lambda_j(2, 1, 1, 1, -1)


def test_c_tilde_out_of_range():
    from thetahecke.closed_forms import OmegaProfile
    from thetahecke.fqspace import zero_space

    prof = OmegaProfile(0, 0, 1, zero_space(3, 0))
    with pytest.raises(IndexOutOfRange):
        c_tilde_closed(prof, 1, 1, 2, 3, 1)


def test_c_tilde_matches_direct_sum(A1A1):
    # Omega = 5 e1 inside (1/5)L: r2 = 1, and the (ell, t) sum has terms 1 + 2
    from thetahecke.closed_forms import c_tilde_direct

    Y = np.array([[25], [0]])
    prof = omega_profile(A1A1, Y / 5, 5)
    assert prof.key()[:3] == (0, 0, 1)
    assert c_tilde_closed(prof, 1, 1, 1, 5, 1) == c_tilde_direct(A1A1, Y, 5, 1, 1) == 3


def test_b_j_out_of_range():
    from thetahecke.closed_forms import OmegaProfile
    from thetahecke.fqspace import zero_space

    with pytest.raises(IndexOutOfRange):
        b_j_closed(OmegaProfile(0, 0, 1, zero_space(3, 0)), 1, 1, 1, 3, -1)


@pytest.mark.parametrize("name,p,j", [("a1a1", 5, 1), ("d4", 3, 1), ("d4", 3, 2), ("a1a1a2", 5, 1)])
def test_neighbor_counts(request, name, p, j):
    L = request.getfixturevalue({"a1a1": "A1A1", "d4": "D4", "a1a1a2": "A1A1A2"}[name])
    Ks = enumerate_Kj(L, p, j)
    assert len(Ks) == ppow(p, j * (j - 1) // 2) * phi_brute(L.mod_p_space(p), j)
    for K in Ks[:20]:
        M = K.lattice()
        assert M.discriminant == L.discriminant
        assert all(M.gram[i][i] % 2 == 0 for i in range(M.rank))


def test_phi_for_chi_minus(A1A1A2, A1A1):
    for L, p in ((A1A1A2, 5), (A1A1, 3)):
        assert L.character_at(p) == -1
        k = L.k
        for m in range(k + 1):
            assert phi_brute(L.mod_p_space(p), m) == delta(p, k, m) * beta(p, k - 1, m)


def test_dual_paths_small(D4, A1A1):
    assert dual_path_c_tilde(A1A1, 5, 1, 1, 4).passed
    assert dual_path_c_tilde(D4, 3, 1, 1, 4).passed
    assert dual_path_b(D4, 3, 1, 1, 4).passed


def test_commutation_small(A1A1):
    rep = verify_commutation(A1A1, 5, 1, 1, 4)
    assert rep.passed and rep.notes["neighbors_by_j"] == {"0": 1, "1": 2}


def test_commutation_index_checks(A1A1):
    with pytest.raises(IndexOutOfRange):
        verify_commutation(A1A1, 5, 2, 2, 2)
    with pytest.raises(IndexOutOfRange):
        verify_commutation(A1A1, 3, 1, 1, 2)


def test_mixed_genus_rejected(D4, A2):
    with pytest.raises(MixedGenus):
        verify_eigenform([D4, IntegralLattice([[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]])], 3, 1, 2)


def test_report_serialisation(D4):
    rep = verify_eigenform([D4], 3, 1, 2, "tprime", 1)
    assert rep.passed
    assert rep.to_dict()["notes"]["predicted"] == "12/1"
    assert rep.to_csv().splitlines()[0].startswith("class_gram")
    assert rep.failing() == []
