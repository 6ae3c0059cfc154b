import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabverify.rings import (
    RingError,
    check_stable_rank_one,
    galois_field,
    opposite,
    parse_ring,
    ring_axiom_failures,
    upper_triangular,
    zmod,
)

SPECS = ["Z/2", "Z/4", "Z/6", "Z/9", "F_2", "F_3", "F_4", "F_8", "F_9",
         "prod(F_2,F_3)", "UT2(F_2)", "op(UT2(F_2))", "UT2(Z/4)"]


@pytest.mark.parametrize("spec", SPECS)
def test_axioms_hold(spec):
    assert ring_axiom_failures(parse_ring(spec)) == []


@pytest.mark.parametrize("spec,size,units", [
    ("Z/6", 6, 2), ("Z/4", 4, 2), ("F_4", 4, 3), ("F_9", 9, 8),
    ("prod(F_2,F_3)", 6, 2), ("UT2(F_2)", 8, 2),
])
def test_sizes_and_units(spec, size, units):
    r = parse_ring(spec)
    assert r.size == size
    assert len(r.units()) == units


@pytest.mark.parametrize("spec", ["F_2", "F_3", "F_4", "F_5", "F_8", "F_9"])
def test_fields(spec):
    r = parse_ring(spec)
    assert r.is_field
    assert len(r.units()) == r.size - 1


@pytest.mark.parametrize("spec", ["Z/4", "Z/6", "UT2(F_2)", "prod(F_2,F_2)"])
def test_non_fields(spec):
    assert not parse_ring(spec).is_field


def test_upper_triangular_noncommutative():
    r = parse_ring("UT2(F_2)")
    assert not r.commutative
    op = opposite(r)
    assert np.array_equal(op.mul, r.mul.T)


@pytest.mark.parametrize("bad", ["Z/1", "Z/0", "F_6", "F_1", "", "UT2", "prod(F_2", "Z/4 Z/4", "Q"])
def test_malformed_specs_rejected(bad):
    with pytest.raises(RingError):
        parse_ring(bad)


def test_guard():
    with pytest.raises(RingError, match="guard"):
        zmod(10_000, guard=100)


@pytest.mark.parametrize("spec", ["Z/2", "Z/4", "Z/6", "Z/8", "Z/9", "F_4", "UT2(F_2)", "prod(F_2,F_3)"])
def test_finite_rings_have_stable_rank_one(spec):
    assert check_stable_rank_one(parse_ring(spec))


def test_field_modulus_irreducible():
    f = galois_field(8)
    x = f.nonzero()
    # multiplicative group of a field of order 8 is cyclic of order 7
    for a in x:
        p = f.one
        for _ in range(7):
            p = int(f.mul[p, a])
        assert p == f.one


@given(st.sampled_from(SPECS), st.data())
def test_unit_inverse_property(spec, data):
    r = parse_ring(spec)
    u = data.draw(st.sampled_from(sorted(r.units())))
    v = r.inverse[u]
    assert r.mul[u, v] == r.one and r.mul[v, u] == r.one


@given(st.sampled_from(SPECS), st.data())
def test_distributivity_samples(spec, data):
    r = parse_ring(spec)
    a, b, c = (data.draw(st.integers(0, r.size - 1)) for _ in range(3))
    assert r.mul[a, r.add[b, c]] == r.add[r.mul[a, b], r.mul[a, c]]
    assert r.mul[r.add[a, b], c] == r.add[r.mul[a, c], r.mul[b, c]]


@given(st.integers(2, 30))
def test_zmod_unit_count_is_totient(n):
    import math
    assert len(zmod(n).units()) == sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def test_ut_dimension():
    assert upper_triangular(3, parse_ring("F_2")).size == 2 ** 6
