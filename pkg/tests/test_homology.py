import itertools
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabverify.complexes import SimplicialComplex
from stabverify.homology import (
    HALF,
    Q,
    Z,
    CoefficientDomain,
    Fp,
    HomologyError,
    HomologyResult,
    SparseIntMatrix,
    chain_complex_of,
    determinantal_divisors,
    homology,
    homology_basis,
    reduced_homology,
    relative_homology,
    smith_normal_form,
    verify_cm,
    verify_spherical,
)
from stabverify.oracles import smith_diagonal

RP2 = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
       (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5)]
TORUS = [tuple(sorted({i, (i + 1) % 7, (i + 3) % 7})) for i in range(7)] + \
    [tuple(sorted({i, (i + 2) % 7, (i + 3) % 7})) for i in range(7)]


def sphere(k):
    return SimplicialComplex.from_maximal(itertools.combinations(range(k + 2), k + 1))


int_matrices = st.integers(1, 7).flatmap(
    lambda r: st.integers(1, 7).flatmap(
        lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c), min_size=r, max_size=r)))


@given(int_matrices)
def test_snf_matches_determinantal_divisors(a):
    assert tuple(smith_normal_form(a)[0]) == tuple(x for x in determinantal_divisors(a) if x)


@given(int_matrices)
def test_snf_matches_dense_oracle(a):
    assert list(smith_normal_form(a)[0]) == smith_diagonal(a)


@given(int_matrices)
def test_snf_transforms_diagonalize(a):
    d, U, V = smith_normal_form(a, with_transforms=True)
    r, c = len(a), len(a[0])
    D = [[sum(U[i][k] * a[k][l] * V[l][j] for k in range(r) for l in range(c)) for j in range(c)] for i in range(r)]
    for i in range(r):
        for j in range(c):
            if i != j:
                assert D[i][j] == 0
    assert tuple(D[i][i] for i in range(min(r, c)) if D[i][i]) == tuple(d)


@given(int_matrices)
def test_divisor_chain(a):
    d = smith_normal_form(a)[0]
    for x, y in zip(d, d[1:]):
        assert y % x == 0


def test_snf_regression_coefficient_growth():
    a = [[-9, -2, 6, 5, 2, -1, 5], [1, 8, -4, 6, -6, -1, -6], [-7, 9, -2, 7, 9, -6, -1],
         [-7, -8, 0, 5, 7, -7, 1], [3, 0, 9, 10, -4, 7, 5], [4, 6, -2, -9, 7, -10, -8],
         [2, 10, -10, 9, 5, 0, -3]]
    assert tuple(smith_normal_form(a)[0]) == determinantal_divisors(a)


def test_sparse_dense_roundtrip():
    a = [[0, 2, 0], [1, 0, -3]]
    assert SparseIntMatrix.from_dense(a).to_dense() == a


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_spheres(k):
    h = reduced_homology(sphere(k))
    for d, v in h.items():
        assert v == (HomologyResult(1) if d == k else HomologyResult(0))


def test_rp2():
    x = SimplicialComplex.from_maximal(RP2)
    h = homology(x, Z)
    assert h[0] == HomologyResult(1)
    assert h[1] == HomologyResult(0, (2,))
    assert h[2] == HomologyResult(0)
    assert homology(x, Fp(2))[1] == HomologyResult(1)
    assert homology(x, Fp(2))[2] == HomologyResult(1)
    assert homology(x, Fp(3))[1] == HomologyResult(0)
    assert homology(x, Q)[1] == HomologyResult(0)
    assert homology(x, HALF)[1].is_zero()


def test_torus():
    h = homology(SimplicialComplex.from_maximal(TORUS), Z)
    assert [h[k].rank for k in range(3)] == [1, 2, 1]
    assert not any(h[k].torsion for k in range(3))


@given(st.lists(st.lists(st.integers(0, 6), min_size=1, max_size=4), min_size=1, max_size=12))
def test_dd_and_euler(facets):
    x = SimplicialComplex.from_maximal(facets)
    assert chain_complex_of(x, reduced=True, check=False).check_dd()
    h = homology(x, Z)
    assert sum((-1) ** k * v.rank for k, v in h.items()) == x.euler_characteristic()


@given(st.lists(st.lists(st.integers(0, 6), min_size=1, max_size=4), min_size=1, max_size=12),
       st.sampled_from([2, 3, 5]))
def test_universal_coefficients(facets, p):
    x = SimplicialComplex.from_maximal(facets)
    hz = homology(x, Z)
    hp = homology(x, Fp(p))
    for k, v in hp.items():
        below = hz.get(k - 1, HomologyResult(0))
        want = hz[k].rank + sum(1 for t in hz[k].torsion if t % p == 0) + sum(1 for t in below.torsion if t % p == 0)
        assert v.rank == want


def test_relative_homology_of_disk_rel_boundary():
    disk = SimplicialComplex.from_maximal([(0, 1, 2)])
    bd = SimplicialComplex.from_maximal([(0, 1), (1, 2), (0, 2)])
    h = relative_homology(disk, bd)
    assert h[2] == HomologyResult(1)
    assert h[1].is_zero() and h[0].is_zero()


def test_spherical_and_cm():
    assert verify_spherical(sphere(2), 2)
    assert verify_cm(sphere(2), 2)
    bowtie = SimplicialComplex.from_maximal([(0, 1, 2), (2, 3, 4)])
    assert verify_spherical(bowtie, 2)
    bad = verify_cm(bowtie, 2)
    assert not bad and bad.witness is not None


def test_not_spherical_reports_degree():
    x = SimplicialComplex.from_maximal([(0, 1), (2, 3)])
    r = verify_spherical(x, 1)
    assert not r and "H_0" in r.detail


def test_homology_basis_rank():
    x = SimplicialComplex.from_maximal(TORUS)
    assert homology_basis(x, 2, reduced=True).rank == 1
    graph = SimplicialComplex.from_maximal([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
    assert homology_basis(graph, 1, reduced=True).rank == 2


def test_coefficient_parsing():
    assert CoefficientDomain.parse("Fp:3") == Fp(3)
    assert CoefficientDomain.parse("half") == HALF
    with pytest.raises(HomologyError):
        CoefficientDomain.parse("Fp:4")
    with pytest.raises(HomologyError):
        CoefficientDomain.parse("R")


def test_result_formatting():
    assert str(HomologyResult(1, (2, 4))) == "Z^1 + Z/2 + Z/4"
    assert str(HomologyResult(0)) == "0"


def test_specialize():
    h = HomologyResult(1, (2, 6))
    assert h.specialize(HALF) == HomologyResult(1, (3,))
    assert h.specialize(Q) == HomologyResult(1)
    assert h.specialize(Fp(3)) == HomologyResult(2)


def test_large_random_sparse_agrees_with_oracle():
    rng = random.Random(5)
    a = [[rng.choice([0, 0, 0, 1, -1, 2]) for _ in range(30)] for _ in range(25)]
    assert list(smith_normal_form(a)[0]) == smith_diagonal(a)
    assert list(smith_normal_form(SparseIntMatrix.from_dense(np.array(a)))[0]) == smith_diagonal(a)
