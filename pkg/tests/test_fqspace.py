import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetahecke.fqspace import (
    FqQuadSpace,
    Residual,
    Subspace,
    TooLarge,
    UndefinedComposition,
    WittDecomposition,
    aniso_plane,
    complement_class,
    compose_class,
    decompose,
    find_isotropic,
    hyperbolic_space,
    line_space,
    orthogonal_sum,
    phi_brute,
    phi_general,
    phi_regular,
    radical,
    reduction_rhs,
    space_from_class,
    totally_isotropic_subspaces,
    zero_space,
)
from thetahecke.identities import random_basis_change, random_space, witt_types


def test_radical_of_diag22_mod2_is_everything():
    V = FqQuadSpace.from_gram([[2, 0], [0, 2]], 2)
    # q(x) = x1^2 + x2^2 = (x1 + x2)^2 has polar form zero but is not identically zero
    R = radical(V)
    assert R.dim == 1
    assert decompose(V) == WittDecomposition(1, 0, Residual.LINE)


def test_hyperbolic_plane_type():
    for p in (2, 3, 5):
        assert decompose(hyperbolic_space(p, 1)) == WittDecomposition(0, 1, Residual.ZERO)
        assert decompose(aniso_plane(p)) == WittDecomposition(0, 0, Residual.ANISO_PLANE)


def test_two_aniso_planes_make_hyperbolic_space():
    for p in (2, 3, 5):
        assert decompose(orthogonal_sum(aniso_plane(p), aniso_plane(p))).as_tuple() == (0, 2, "ZERO")


def test_find_isotropic():
    V = hyperbolic_space(3, 2)
    x = find_isotropic(V)
    assert x.any() and V.q(x) == 0


def test_phi_examples():
    # hyperbolic plane: two isotropic lines; regular dim 4 hyperbolic over F_2: 15 points, 9 isotropic lines
    assert phi_regular(WittDecomposition(0, 1, Residual.ZERO), 1, 3) == 2
    assert phi_regular(WittDecomposition(0, 2, Residual.ZERO), 1, 2) == 9
    assert phi_regular(WittDecomposition(0, 2, Residual.ZERO), 2, 2) == 6
    assert phi_regular(WittDecomposition(0, 0, Residual.ANISO_PLANE), 1, 5) == 0
    assert phi_general(WittDecomposition(2, 0, Residual.ZERO), 2, 3) == 1


def test_phi_zero_index():
    assert phi_general(zero_space(3, 0), 0) == 1
    assert phi_general(hyperbolic_space(2, 1), 3) == 0


def test_phi_brute_limit():
    with pytest.raises(TooLarge):
        phi_brute(hyperbolic_space(5, 3), 2, limit=10)


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_phi_general_matches_brute_on_every_type(p, dim):
    for V in witt_types(p, dim, max_rad=2):
        for ell in range(3):
            assert phi_general(V, ell) == phi_brute(V, ell), (decompose(V), ell)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.integers(0, 10**6))
def test_phi_invariant_under_basis_change(p, dim, seed):
    rng = np.random.default_rng(seed)
    V = random_space(p, dim, rng)
    W = random_basis_change(V, rng)
    assert decompose(V) == decompose(W)
    for ell in range(3):
        assert phi_general(V, ell) == phi_brute(W, ell)


def test_totally_isotropic_subspaces_are_isotropic():
    V = hyperbolic_space(3, 2)
    subs = totally_isotropic_subspaces(V, 2)
    assert len(subs) == phi_general(V, 2)
    for S in subs:
        assert not V.restrict(S).coeffs.any()


def test_complement_class():
    V = hyperbolic_space(3, 2)
    U = Subspace(V, np.array([[1, 0, 0, 0]], dtype=np.int64))  # isotropic line
    assert complement_class(V, U).as_tuple() == (1, 1, "ZERO")
    W = orthogonal_sum(hyperbolic_space(5, 1), aniso_plane(5))
    U = Subspace(W, np.array([[0, 0, 1, 0]], dtype=np.int64))
    c = complement_class(W, U)
    assert c.dim == 3 and c.rad_dim == 0


def test_compose_class_cancellation():
    wd = WittDecomposition(1, 1, Residual.LINE)
    assert compose_class(wd, -1).as_tuple() == (1, 0, "LINE")
    assert compose_class(wd, 0, aniso=True).as_tuple() == (1, 2, "LINE")
    with pytest.raises(UndefinedComposition):
        compose_class(wd, -2)


@pytest.mark.parametrize("p", [2, 3])
def test_reduction_matches_brute(p):
    for U in witt_types(p, 2, max_rad=1):
        wd = decompose(U)
        for t in (0, 1):
            for variant in ("a", "b"):
                target = compose_class(wd, t, aniso=variant == "b")
                V = space_from_class(target, p)
                for ell in range(3):
                    assert reduction_rhs(wd, t, ell, p, variant) == phi_brute(V, ell)


def test_reduction_undefined():
    with pytest.raises(UndefinedComposition):
        reduction_rhs(WittDecomposition(0, 0, Residual.ZERO), -1, 1, 3)


def test_line_space_is_regular():
    assert decompose(line_space(3)).regular
