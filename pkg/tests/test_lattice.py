import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetahecke.gramclass import aut_order, canonicalize, class_inventory
from thetahecke.lattice import DividesLevel, IntegralLattice, read_matrix_file, theta_coefficients


def sigma3(m):
    return sum(d**3 for d in range(1, m + 1) if m % d == 0)


def random_unimodular(n, rng, steps=6):
    U = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(n, 2, replace=False) if n > 1 else (0, 0)
        if i == j:
            U[:, 0] *= -1
            continue
        U[:, i] += int(rng.integers(-1, 2)) * U[:, j]
        if rng.random() < 0.3:
            U[:, [i, j]] = U[:, [j, i]]
    return U


def test_levels(E8, A1A1, A2, D4):
    assert E8.level == 1
    assert A1A1.level == 4
    assert A2.level == 3
    assert D4.level == 2


def test_characters(E8, A2, D4, A1A1):
    assert E8.character_at(2) == 1
    assert A2.character_at(2) == -1
    assert D4.character_at(3) == 1
    assert A1A1.character_at(5) == 1
    assert A1A1.character_at(3) == -1
    with pytest.raises(DividesLevel):
        A2.character_at(3)


def test_e8_theta_is_eisenstein(E8):
    F = theta_coefficients(E8, 1, 10)
    for m in range(1, 6):
        assert F.coeff(canonicalize([[2 * m]])) == 240 * sigma3(m)


def test_diag22_represents_itself(A1A1):
    assert A1A1.count_representations([[2, 0], [0, 2]]) == 8
    assert A1A1.count_representations([[2, 1], [1, 2]]) == 0


def test_d4_roots(D4):
    assert D4.count_representations([[2]]) == 24


def test_aut_orders():
    assert aut_order([[2]]) == 2
    assert aut_order([[2, -1], [-1, 2]]) == 12
    assert aut_order([[2, 0], [0, 4]]) == 4
    assert aut_order([[2, 0], [0, 2]]) == 8


def test_canonicalize_examples():
    assert canonicalize([[2, 1], [1, 2]]) == canonicalize([[2, -1], [-1, 2]])
    assert canonicalize([[4, 2], [2, 2]]) == canonicalize([[2, 0], [0, 2]])
    c = canonicalize([[0, 0], [0, 2]])
    assert c.rank == 1 and c.trace == 2


def test_inventory_degree1():
    assert [c.rep for c in class_inventory(1, 6)] == [((0,),), ((2,),), ((4,),), ((6,),)]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([c for c in class_inventory(2, 8)] + [c for c in class_inventory(3, 6)]),
       st.integers(0, 10**6))
def test_canonicalize_invariant_and_idempotent(cls, seed):
    rng = np.random.default_rng(seed)
    U = random_unimodular(cls.n, rng)
    T = U.T @ cls.matrix() @ U
    assert canonicalize(T) == cls
    assert canonicalize(canonicalize(T).rep) == cls


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_representation_count_is_a_class_function(seed):
    L = IntegralLattice([[2, -1, 0, 0], [-1, 2, -1, -1], [0, -1, 2, 0], [0, -1, 0, 2]])
    rng = np.random.default_rng(seed)
    T = np.array([[4, 1], [1, 2]])
    U = random_unimodular(2, rng, steps=3)
    assert L.count_representations(U.T @ T @ U) == L.count_representations(T)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_character_invariant_under_basis_change(seed):
    A = np.array([[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, -1], [0, 0, -1, 2]])
    rng = np.random.default_rng(seed)
    U = random_unimodular(4, rng)
    L1, L2 = IntegralLattice(A.tolist()), IntegralLattice((U.T @ A @ U).tolist())
    assert L1.level == L2.level
    for p in (5, 7, 11):
        assert L1.character_at(p) == L2.character_at(p)


def test_read_matrix_file_rejects_garbage(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("2\n2 1\n0 2\n")
    with pytest.raises(ValueError):
        read_matrix_file(f)
    f.write_text("2\n2 x\nx 2\n")
    with pytest.raises(ValueError):
        read_matrix_file(f)


def test_odd_lattice_rejected():
    with pytest.raises(ValueError):
        IntegralLattice([[1, 0], [0, 2]])
