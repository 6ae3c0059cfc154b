import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabverify.complexes import (
    ComplexError,
    Poset,
    SimplicialComplex,
    SimplicialMap,
    join,
    link,
    links_of_all,
)


def boundary_of_simplex(k):
    return SimplicialComplex.from_maximal(itertools.combinations(range(k + 1), k))


facet_lists = st.lists(st.lists(st.integers(0, 7), min_size=1, max_size=4), min_size=1, max_size=10)


@given(facet_lists)
def test_from_maximal_downward_closed(facets):
    x = SimplicialComplex.from_maximal(facets)
    assert x.is_downward_closed()
    for f in facets:
        assert x.contains(f)


@given(facet_lists)
def test_maximal_simplices_regenerate(facets):
    x = SimplicialComplex.from_maximal(facets)
    y = SimplicialComplex.from_maximal([tuple(r) for m in x.maximal_simplices() for r in m])
    assert x.same_as(y)


@given(facet_lists, facet_lists)
def test_join_f_vector(a, b):
    x = SimplicialComplex.from_maximal(a)
    y = SimplicialComplex.from_maximal(b)
    j = join(x, y)
    fx = (1,) + x.f_vector()
    fy = (1,) + y.f_vector()
    want = [0] * (len(fx) + len(fy) - 1)
    for i, p in enumerate(fx):
        for k, q in enumerate(fy):
            want[i + k] += p * q
    assert (1,) + j.f_vector() == tuple(want)


@given(facet_lists)
def test_links_of_all_agrees_with_link(facets):
    x = SimplicialComplex.from_maximal(facets)
    for p in range(x.dim + 1):
        for i, lk in links_of_all(x, p):
            sigma = x.simplex_list(p)[i]
            assert lk.f_vector() == link(x, sigma).f_vector()


def test_link_in_boundary_of_tetrahedron():
    x = boundary_of_simplex(3)
    lk = link(x, [0])
    assert lk.f_vector() == (3, 3)
    assert link(x, [0, 1]).f_vector() == (2,)


def test_link_of_non_simplex_raises():
    x = SimplicialComplex.from_maximal([(0, 1), (1, 2)])
    with pytest.raises(ComplexError):
        link(x, [0, 2])


def test_euler_characteristic_of_spheres():
    for k in range(1, 5):
        assert boundary_of_simplex(k).euler_characteristic() == 1 + (-1) ** (k - 1)


def test_poset_order_complex_of_chain():
    p = Poset.from_relation(list(range(4)), lambda a, b: a < b)
    assert p.check()
    x = p.order_complex()
    assert x.f_vector() == (4, 6, 4, 1)
    assert p.dimension() == 3


def test_poset_of_subsets():
    elems = [frozenset(s) for k in (1, 2) for s in itertools.combinations(range(3), k)]
    p = Poset.from_relation(elems, lambda a, b: a < b)
    assert len(p.covers()) == 6
    assert p.order_complex().f_vector() == (6, 6)


def test_simplicial_map_identity_is_iso():
    x = boundary_of_simplex(3)
    f = SimplicialMap(x, x, np.arange(x.num_vertices))
    assert f.is_simplicial() and f.is_isomorphism()


def test_collapsing_map_not_injective():
    x = SimplicialComplex.from_maximal([(0, 1)])
    y = SimplicialComplex.from_maximal([(0,)])
    f = SimplicialMap(x, y, np.array([0, 0]))
    assert not f.injective_on_simplices()
