import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabverify.homology import HomologyResult
from stabverify.linalg import span_submodule, unit_vector
from stabverify.oracles import tits_reduced_homology
from stabverify.rings import parse_ring
from stabverify.steinberg import (
    SteinbergError,
    apartment_chain,
    apartment_class,
    charney_module,
    enumerate_symbols,
    is_cycle,
    lattice_span,
    relative_apartment_chain,
    relative_apartment_class,
    sign_flip_element,
    steinberg_module,
    verify_apartments_generate,
    verify_coinvariants_vanish,
    verify_relative_generate,
)


@pytest.mark.parametrize("spec,n,rank", [("F_2", 2, 2), ("F_2", 3, 8), ("F_3", 2, 3), ("F_4", 2, 4)])
def test_steinberg_rank_is_q_to_binomial(spec, n, rank):
    st_ = steinberg_module(parse_ring(spec), n)
    assert st_.rank == rank
    assert tits_reduced_homology(parse_ring(spec), n) == (rank, [])


@pytest.mark.parametrize("spec,n,m,rank", [
    ("F_2", 1, 1, 1), ("F_3", 1, 1, 2), ("F_2", 2, 1, 3), ("F_3", 2, 1, 16), ("F_2", 3, 1, 21),
])
def test_relative_ranks(spec, n, m, rank):
    assert steinberg_module(parse_ring(spec), n, m).rank == rank


@pytest.mark.parametrize("spec,n,rank", [("F_2", 2, 5), ("F_3", 2, 11), ("F_2", 3, 113)])
def test_charney_ranks(spec, n, rank):
    assert charney_module(parse_ring(spec), n).rank == rank


def test_charney_relative_rank():
    ring = parse_ring("F_2")
    W = span_submodule(ring, [unit_vector(ring, 3, 2)], 3)
    assert charney_module(ring, 3, W).rank == 9


@pytest.mark.parametrize("spec,n", [("F_2", 2), ("F_2", 3), ("F_3", 2), ("Z/4", 2), ("UT2(F_2)", 2)])
def test_apartments_generate(spec, n):
    r = verify_apartments_generate(parse_ring(spec), n)
    assert r.ok, r.to_json()
    assert r.equivariance_failures == 0


@pytest.mark.parametrize("spec,n,m", [("F_2", 1, 1), ("F_3", 1, 1), ("F_2", 2, 1), ("F_2", 1, 2)])
def test_relative_symbols_generate(spec, n, m):
    r = verify_relative_generate(parse_ring(spec), n, m)
    assert r.ok, r.to_json()
    assert r.details["sign_flip_failures"] == 0


@pytest.mark.parametrize("spec,count", [("F_2", 2), ("F_3", 12)])
def test_symbol_counts_n1_m1(spec, count):
    assert len(enumerate_symbols(parse_ring(spec), 1, 1)) == count


def test_symbol_validation():
    with pytest.raises(SteinbergError):
        enumerate_symbols(parse_ring("F_2"), 1, 0)
    with pytest.raises(SteinbergError):
        enumerate_symbols(parse_ring("F_2"), 2, 1, guard=3)


@pytest.mark.parametrize("spec,n", [("F_2", 3), ("F_3", 2)])
def test_apartment_chains_are_cycles(spec, n):
    ring = parse_ring(spec)
    s = steinberg_module(ring, n)
    for M in s.group.elements[:20]:
        assert is_cycle(s.complex, n - 2, apartment_chain(s, M))


def test_relative_chains_are_cycles():
    ring = parse_ring("F_3")
    s = steinberg_module(ring, 2, 1)
    for t in enumerate_symbols(ring, 2, 1)[:30]:
        assert is_cycle(s.complex, s.degree, relative_apartment_chain(s, t))


def test_sign_flip_negates_class():
    ring = parse_ring("F_3")
    s = steinberg_module(ring, 2, 1)
    for t in enumerate_symbols(ring, 2, 1)[::17]:
        phi = sign_flip_element(ring, t)
        assert phi in s.group
        c = relative_apartment_class(s, t)
        assert relative_apartment_class(s, t.act(ring, phi)) == [-x for x in c]


@given(st.data())
def test_apartment_equivariance(data):
    s = _st_f3_2()
    M = data.draw(st.sampled_from(s.group.elements))
    g = data.draw(st.sampled_from(s.group.elements))
    moved = apartment_class(s, s.group.mul(M, g))
    base = apartment_class(s, M)
    act = s.module.matrix(g)
    assert moved == [sum(base[i] * act[i][j] for i in range(s.rank)) for j in range(s.rank)]


_cache = {}


def _st_f3_2():
    if "st" not in _cache:
        _cache["st"] = steinberg_module(parse_ring("F_3"), 2)
    return _cache["st"]


@pytest.mark.parametrize("spec,kind,n,m,coinv", [
    ("F_2", "St", 2, 0, HomologyResult(0)),
    ("F_2", "St", 1, 1, HomologyResult(0, (2,))),
    ("F_2", "St", 2, 1, HomologyResult(0, (2,))),
    ("F_3", "St", 2, 0, HomologyResult(0)),
    ("F_3", "St", 1, 1, HomologyResult(0)),
    ("F_2", "Ch", 2, 0, HomologyResult(0, (2,))),
    ("F_2", "Ch", 3, 0, HomologyResult(0, (2, 4))),
])
def test_coinvariants(spec, kind, n, m, coinv):
    ring = parse_ring(spec)
    mod = steinberg_module(ring, n, m) if kind == "St" else charney_module(ring, n)
    r = verify_coinvariants_vanish(mod)
    assert r.coinvariants == coinv
    assert r.ok


def test_lattice_span():
    assert lattice_span(2, [[1, 0], [0, 2]]) == (2, [2])
    assert lattice_span(2, [[1, 1], [1, -1]]) == (2, [2])
    assert lattice_span(3, [[1, 0, 0]]) == (1, [])
