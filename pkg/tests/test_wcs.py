import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcsbench.report import BudgetExceeded
from wcsbench.tensor_core import (
    DimensionError,
    IndexPermutation,
    adjoint,
    flip,
    identity,
    kron,
    matrix_unit,
    permutation_to_matrix,
)
from wcsbench.wcs import (
    check_quasi_triangularity,
    check_r_relation,
    check_triangularity,
    check_unit_conditions,
    check_weak_coassociativity,
    divisor_pairs,
    divisor_triples,
    phi,
    phi_index_map,
    phi_op,
    rmatrix,
)

E = matrix_unit


def pairs_upto(limit):
    return [(a, b) for a in range(1, limit + 1) for b in range(1, limit // a + 1)]


def triples_upto(limit):
    return [(a, b, c) for a, b in pairs_upto(limit) for c in range(1, limit // (a * b) + 1)]


def test_divisor_pairs_examples():
    assert divisor_pairs(1) == [(1, 1)]
    assert divisor_pairs(6) == [(1, 6), (2, 3), (3, 2), (6, 1)]
    assert divisor_pairs(4) == [(1, 4), (2, 2), (4, 1)]
    with pytest.raises(ValueError):
        divisor_pairs(0)


@given(st.integers(1, 500))
def test_divisor_pairs_complete_and_ordered(a):
    expected = [(b, a // b) for b in range(1, a + 1) if a % b == 0]
    assert divisor_pairs(a) == expected


def test_divisor_triples_complete():
    assert sorted(divisor_triples(12)) == sorted(
        (b, c, d) for b, c, d in itertools.product(range(1, 13), repeat=3) if b * c * d == 12
    )


def test_phi_example():
    assert np.array_equal(phi(2, 2, E(4, 2, 3)), kron(E(2, 1, 2), E(2, 2, 1)))
    assert np.array_equal(phi_op(2, 2, E(4, 2, 3)), kron(E(2, 2, 1), E(2, 1, 2)))


def test_phi_matches_basis_formula_on_all_units():
    for n, m in [(2, 3), (3, 2), (2, 2), (1, 4)]:
        for i, i2 in itertools.product(range(1, n + 1), repeat=2):
            for j, j2 in itertools.product(range(1, m + 1), repeat=2):
                src = E(n * m, m * (i - 1) + j, m * (i2 - 1) + j2)
                assert np.array_equal(phi(n, m, src), kron(E(n, i, i2), E(m, j, j2)))


def test_phi_is_identity_reshape_under_row_major_kron():
    for n, m in pairs_upto(24):
        assert phi_index_map(n, m).is_identity()


def test_phi_trivial_cases():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    assert np.array_equal(phi(1, 5, x), kron(identity(1), x))
    assert np.array_equal(phi_op(1, 5, x), x)
    assert np.array_equal(phi(1, 1, [[2.0]]), [[2.0]])
    assert np.array_equal(phi(3, 4, identity(12)), kron(identity(3), identity(4)))
    with pytest.raises(DimensionError):
        phi(2, 3, identity(5))


@pytest.mark.parametrize("n,m", [(n, m) for n, m in pairs_upto(12)])
def test_phi_is_unital_star_isomorphism_on_unit_pairs(n, m):
    d = n * m
    units = [E(d, r, c) for r in range(1, d + 1) for c in range(1, d + 1)]
    images = [phi(n, m, x) for x in units]
    assert np.array_equal(phi(n, m, identity(d)), identity(d))
    for x, fx in zip(units, images):
        assert np.array_equal(phi(n, m, adjoint(x)), adjoint(fx))
    stack, fstack = np.stack(units), np.stack(images)
    # all products x @ y at once
    prods = np.einsum("aij,bjk->abik", stack, stack).reshape(-1, d, d)
    fprods = np.einsum("aij,bjk->abik", fstack, fstack).reshape(-1, d, d)
    assert np.array_equal(phi(n, m, prods), fprods)


def test_rmatrix_examples():
    assert rmatrix(2, 2).map.tolist() == [0, 2, 1, 3]
    assert rmatrix(2, 2) == flip(2, 2)
    assert rmatrix(2, 3).map.tolist() == [0, 3, 1, 4, 2, 5]
    for k in range(1, 7):
        assert rmatrix(k, 1).is_identity()
        assert rmatrix(1, k).is_identity()
    # (i,j) = (1,2), l = 2, solves 2 = 2(j_-1) + i_ at (i_, j_) = (2, 1)
    assert rmatrix(2, 3)(1) == (2 - 1) * 3 + (1 - 1)


@pytest.mark.parametrize("n,m", pairs_upto(36))
def test_rmatrix_solves_the_index_equation(n, m):
    r = rmatrix(n, m)
    for i, j in itertools.product(range(1, n + 1), range(1, m + 1)):
        ell = m * (i - 1) + j
        target = [(i_, j_) for i_ in range(1, n + 1) for j_ in range(1, m + 1) if n * (j_ - 1) + i_ == ell]
        assert len(target) == 1
        i_, j_ = target[0]
        assert r(ell - 1) == (i_ - 1) * m + (j_ - 1)
    u = permutation_to_matrix(r)
    assert np.array_equal(u @ adjoint(u), identity(n * m))


@pytest.mark.parametrize("a,b,c", [(1, 1, 1), (2, 3, 2), (2, 2, 2)])
def test_weak_coassociativity_examples(a, b, c):
    rep = check_weak_coassociativity(a, b, c)
    assert rep.passed and rep.max_deviation == 0
    assert rep.instances == (a * b * c) ** 2


def test_weak_coassociativity_all_triples_upto_24():
    for t in triples_upto(24):
        rep = check_weak_coassociativity(*t)
        assert rep.passed and rep.max_deviation == 0, rep.summary()


@pytest.mark.parametrize("a", [1, 2, 5])
def test_unit_conditions_examples(a):
    rep = check_unit_conditions(a)
    assert rep.passed and rep.max_deviation == 0
    assert rep.instances == 2 * a * a


def test_r_relation_examples_and_range():
    for a, b in [(1, 7), (2, 2), (2, 3)] + pairs_upto(36):
        rep = check_r_relation(a, b)
        assert rep.passed and rep.max_deviation == 0, rep.summary()


def test_hexagons_and_triangularity_ranges():
    for t in [(1, 1, 1), (2, 2, 2), (2, 3, 2)] + triples_upto(24):
        rep = check_quasi_triangularity(*t)
        assert rep.passed and rep.max_deviation == 0, rep.summary()
    for a, b in [(1, 5), (2, 2), (3, 4)] + pairs_upto(36):
        rep = check_triangularity(a, b)
        assert rep.passed and rep.max_deviation == 0, rep.summary()


@pytest.mark.parametrize(
    "check,args",
    [
        (check_weak_coassociativity, (2, 3, 2)),
        (check_weak_coassociativity, (3, 1, 2)),
        (check_unit_conditions, (4,)),
        (check_r_relation, (2, 3)),
        (check_r_relation, (3, 3)),
    ],
)
def test_sparse_and_dense_paths_agree(check, args):
    sparse, dense = check(*args), check(*args, dense=True)
    assert sparse.to_dict() == dense.to_dict()


def test_dense_r_matrix_uses_dense_path():
    r = permutation_to_matrix(rmatrix(2, 3))
    assert check_r_relation(2, 3, r=r).passed


def test_tampered_r_matrix_fails_with_details():
    bad = rmatrix(2, 3).compose(IndexPermutation.transposition(6, 0, 1))
    for dense in (False, True):
        rep = check_r_relation(2, 3, r=bad, dense=dense)
        assert not rep.passed
        assert rep.failures and rep.max_deviation == 1
        assert rep.failure_count >= len(rep.failures)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(pairs_upto(12)), st.data())
def test_any_wrong_r_block_is_caught(pair, data):
    a, b = pair
    r = rmatrix(a, b)
    other = IndexPermutation(data.draw(st.permutations(range(a * b))))
    rep = check_r_relation(a, b, r=other)
    # the canonical R is not the only solution; compare against the dense truth
    truth = all(
        np.array_equal(
            permutation_to_matrix(other) @ phi(a, b, E(a * b, i, j)) @ permutation_to_matrix(other).T,
            phi_op(b, a, E(a * b, i, j)),
        )
        for i in range(1, a * b + 1)
        for j in range(1, a * b + 1)
    )
    assert rep.passed == truth
    if other == r:
        assert rep.passed


def test_budget_refusal():
    with pytest.raises(BudgetExceeded) as err:
        check_weak_coassociativity(4, 4, 5)
    assert "80" in str(err.value) and "64" in str(err.value)
    with pytest.raises(BudgetExceeded):
        check_r_relation(9, 8)
    assert check_r_relation(9, 8, max_dim=72).passed


def test_report_documents_completeness_argument():
    rep = check_weak_coassociativity(2, 2, 1)
    assert "linear" in rep.note
