import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabverify.builders import build_basis_complex, build_tits
from stabverify.groups import (
    GroupError,
    GModule,
    abelianization,
    action_on_homology,
    closure,
    coinvariants,
    embed_block,
    enumerate_gl,
    gl_fixing,
    gl_relative,
    is_simplicial_action,
    is_subgroup,
    mat_compose,
    stabilizer_subgroup,
    vertex_permutation,
)
from stabverify.homology import HomologyResult
from stabverify.linalg import span_submodule, unit_vector, vec_mat
from stabverify.rings import parse_ring


@pytest.mark.parametrize("spec,n,order", [
    ("F_2", 1, 1), ("F_2", 2, 6), ("F_3", 2, 48), ("Z/4", 2, 96), ("Z/6", 1, 2),
    ("F_2", 3, 168), ("F_4", 2, 180), ("UT2(F_2)", 1, 2),
])
def test_gl_orders(spec, n, order):
    assert enumerate_gl(parse_ring(spec), n).order == order


def test_generator_mode_matches_full_scan():
    ring = parse_ring("F_2")
    full = enumerate_gl(ring, 3, mode="full")
    gen = enumerate_gl(ring, 3, mode="generators")
    assert set(full.elements) == set(gen.elements)
    assert "generator" in gen.provenance


def test_gl_3_f_3_order():
    assert enumerate_gl(parse_ring("F_3"), 3).order == 11232


def test_guard_message():
    with pytest.raises(GroupError, match="guard"):
        enumerate_gl(parse_ring("F_3"), 3, mode="full", guard=100)


@pytest.mark.parametrize("n,m,order", [(1, 1, 2), (2, 1, 24), (1, 2, 4)])
def test_relative_orders(n, m, order):
    g = gl_relative(parse_ring("F_2"), n, m)
    assert g.order == order
    for h in g.elements:
        for i in range(m):
            assert tuple(h[i]) == unit_vector(g.ring, g.n, i)


def test_stabilizer_of_e1_in_gl2_f3():
    ring = parse_ring("F_3")
    g = enumerate_gl(ring, 2)
    s = stabilizer_subgroup(g, [unit_vector(ring, 2, 0)])
    assert s.order == 6
    assert is_subgroup(s, g)
    for h in s.elements:
        assert vec_mat(ring, unit_vector(ring, 2, 0), h) == unit_vector(ring, 2, 0)


def test_gl_fixing_matches_stabilizer():
    ring = parse_ring("F_2")
    assert gl_fixing(ring, 3, [unit_vector(ring, 3, 2)]).order == 24


def test_preserving_a_line():
    ring = parse_ring("F_3")
    g = enumerate_gl(ring, 2)
    L = span_submodule(ring, [unit_vector(ring, 2, 0)], 2)
    assert stabilizer_subgroup(g, preserve=L).order == 48 // 4


@pytest.mark.parametrize("spec,n", [("F_2", 2), ("F_3", 2), ("Z/4", 2), ("UT2(F_2)", 2)])
def test_multiplication_table_is_row_action(spec, n):
    g = enumerate_gl(parse_ring(spec), n)
    t = g.multiplication_table()
    for i in range(0, g.order, max(1, g.order // 7)):
        for j in range(0, g.order, max(1, g.order // 5)):
            assert g.elements[t[i, j]] == tuple(tuple(r) for r in g.mul(g.elements[i], g.elements[j]))


def test_closure_of_generators():
    ring = parse_ring("F_2")
    g = enumerate_gl(ring, 2)
    assert len(closure(ring, 2, g.generators)) == 6
    assert g.is_closed()


def test_embed_block():
    ring = parse_ring("F_2")
    a = ((0, 1), (1, 0))
    assert embed_block(ring, a, 3) == ((0, 1, 0), (1, 0, 0), (0, 0, 1))


@pytest.mark.parametrize("spec,n,ab", [
    ("F_2", 2, (0, (2,))), ("F_2", 3, (0, ())), ("F_3", 2, (0, (2,))), ("F_4", 1, (0, (3,))),
    ("Z/4", 1, (0, (2,))),
])
def test_abelianization(spec, n, ab):
    assert abelianization(enumerate_gl(parse_ring(spec), n)) == HomologyResult(*ab)


@pytest.mark.parametrize("spec,n", [("F_2", 3), ("F_3", 2), ("Z/4", 2)])
def test_action_on_basis_complex_is_simplicial(spec, n):
    ring = parse_ring(spec)
    x = build_basis_complex(ring, n)
    g = enumerate_gl(ring, n)
    for h in g.generators:
        assert is_simplicial_action(x, vertex_permutation(x, h, ring, n))


def _steinberg_gmodule(spec, n):
    ring = parse_ring(spec)
    g = enumerate_gl(ring, n)
    x = build_tits(ring, n).order_complex()
    return g, x


@pytest.mark.parametrize("spec,n", [("F_2", 2), ("F_3", 2), ("F_2", 3)])
def test_homology_action_is_homomorphism(spec, n):
    g, x = _steinberg_gmodule(spec, n)
    mod = action_on_homology(g, x, n - 2, acting=g.elements)
    t = g.multiplication_table()
    for i in range(0, g.order, max(1, g.order // 9)):
        for j in range(0, g.order, max(1, g.order // 9)):
            lhs = mod.action[t[i, j]]
            rhs = mat_compose(mod.action[i], mod.action[j])
            assert lhs == rhs


@pytest.mark.parametrize("spec,n", [("F_2", 2), ("F_3", 2), ("F_2", 3)])
def test_coinvariants_generators_match_full_group(spec, n):
    g, x = _steinberg_gmodule(spec, n)
    full = coinvariants(action_on_homology(g, x, n - 2, acting=g.elements))
    gens = coinvariants(action_on_homology(g, x, n - 2))
    assert full == gens


def test_coinvariants_of_trivial_action():
    m = GModule(2, [], [[[1, 0], [0, 1]]])
    assert coinvariants(m) == HomologyResult(2)


def test_coinvariants_of_swap():
    m = GModule(2, [], [[[0, 1], [1, 0]]])
    assert coinvariants(m) == HomologyResult(1)


def test_coinvariants_of_sign():
    m = GModule(1, [], [[[-1]]])
    assert coinvariants(m) == HomologyResult(0, (2,))


@given(st.sampled_from(["F_2", "F_3", "Z/4"]), st.data())
def test_action_is_right_action_on_vectors(spec, data):
    ring = parse_ring(spec)
    g = enumerate_gl(ring, 2)
    a = data.draw(st.sampled_from(g.elements))
    b = data.draw(st.sampled_from(g.elements))
    v = data.draw(st.tuples(st.integers(0, ring.size - 1), st.integers(0, ring.size - 1)))
    assert vec_mat(ring, vec_mat(ring, v, a), b) == vec_mat(ring, v, g.mul(a, b))
