import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabverify.linalg import (
    LinalgError,
    annihilator_dual,
    complement_of,
    dual_pairing,
    extends_to_basis,
    howell_form,
    identity,
    inverse_transpose,
    is_direct_sum,
    is_free_summand,
    is_partial_basis,
    is_unimodular,
    mat_inverse,
    mat_mul,
    parse_matrix,
    format_matrix,
    span_submodule,
    unimodular_vectors,
    vec_mat,
)
from stabverify.rings import opposite, parse_ring

RINGS = ["F_2", "F_3", "F_4", "Z/4", "Z/6", "UT2(F_2)"]


def matrices(ring, n):
    return st.lists(st.lists(st.integers(0, ring.size - 1), min_size=n, max_size=n), min_size=n, max_size=n)


@pytest.mark.parametrize("spec,n,count", [
    ("F_2", 2, 3), ("F_3", 2, 8), ("Z/4", 1, 2), ("Z/4", 2, 12), ("Z/6", 1, 2), ("F_2", 3, 7),
])
def test_unimodular_counts(spec, n, count):
    assert len(unimodular_vectors(parse_ring(spec), n)) == count


def test_ut2_unimodular_count():
    # unimodular iff nonzero in both diagonal quotients F_2^2: 3 * 3 choices,
    # times the 2^2 choices of radical entries
    r = parse_ring("UT2(F_2)")
    assert len(unimodular_vectors(r, 2)) == 36


@given(st.sampled_from(RINGS), st.data())
def test_inverse_roundtrip(spec, data):
    ring = parse_ring(spec)
    m = data.draw(matrices(ring, 2))
    try:
        inv = mat_inverse(ring, m)
    except LinalgError:
        return
    assert [list(r) for r in mat_mul(ring, m, inv)] == [list(r) for r in identity(ring, 2)]
    assert [list(r) for r in mat_mul(ring, inv, m)] == [list(r) for r in identity(ring, 2)]


@given(st.sampled_from(RINGS), st.data())
def test_vec_mat_is_right_action(spec, data):
    ring = parse_ring(spec)
    a, b = data.draw(matrices(ring, 2)), data.draw(matrices(ring, 2))
    v = data.draw(st.lists(st.integers(0, ring.size - 1), min_size=2, max_size=2))
    assert vec_mat(ring, vec_mat(ring, v, a), b) == vec_mat(ring, v, mat_mul(ring, a, b))


@given(st.sampled_from(RINGS), st.data())
def test_rows_of_invertible_matrix_are_basis(spec, data):
    ring = parse_ring(spec)
    m = data.draw(matrices(ring, 2))
    try:
        mat_inverse(ring, m)
    except LinalgError:
        assert not is_partial_basis(ring, m, 2)
        return
    assert is_partial_basis(ring, m, 2)
    assert all(is_unimodular(ring, r) for r in m)


@pytest.mark.parametrize("spec", RINGS)
def test_unimodular_vectors_extend(spec):
    ring = parse_ring(spec)
    for v in unimodular_vectors(ring, 2):
        basis = extends_to_basis(ring, [v], 2)
        assert basis is not None and tuple(basis[0]) == tuple(v)
        assert is_partial_basis(ring, basis, 2)


@pytest.mark.parametrize("spec", ["F_3", "Z/4", "Z/6", "UT2(F_2)"])
def test_free_summand_and_complement(spec):
    ring = parse_ring(spec)
    for v in unimodular_vectors(ring, 3)[:20]:
        s = span_submodule(ring, [v], 3)
        assert is_free_summand(s) == 1
        c = complement_of(s)
        whole = span_submodule(ring, list(identity(ring, 3)), 3)
        assert is_direct_sum([s, c], whole)


def test_non_summand_detected():
    ring = parse_ring("Z/4")
    s = span_submodule(ring, [(2, 0)], 2)
    assert is_free_summand(s) is None
    with pytest.raises(LinalgError):
        complement_of(s)


@given(st.integers(2, 12), st.data())
def test_howell_form_same_span(N, data):
    ring = parse_ring(f"Z/{N}")
    rows = data.draw(st.lists(st.lists(st.integers(0, N - 1), min_size=3, max_size=3), min_size=1, max_size=4))
    h = howell_form(ring, rows)
    assert span_submodule(ring, rows, 3).codes == span_submodule(ring, [list(r) for r in h] or [[0, 0, 0]], 3).codes


@given(st.integers(2, 12), st.data())
def test_howell_form_canonical(N, data):
    ring = parse_ring(f"Z/{N}")
    rows = data.draw(st.lists(st.lists(st.integers(0, N - 1), min_size=2, max_size=2), min_size=1, max_size=3))
    g = data.draw(st.sampled_from([((1, 0), (0, 1)), ((1, 1), (0, 1)), ((0, 1), (1, 0))]))
    moved = [list(r) for r in mat_mul(ring, g, rows[:2])] + [list(r) for r in rows[2:]] if len(rows) >= 2 else rows
    assert [tuple(r) for r in howell_form(ring, rows)] == [tuple(r) for r in howell_form(ring, moved)]


@pytest.mark.parametrize("spec", ["F_2", "Z/4", "UT2(F_2)"])
def test_annihilator_dimension(spec):
    ring = parse_ring(spec)
    for v in unimodular_vectors(ring, 2)[:6]:
        s = span_submodule(ring, [v], 2)
        ann = annihilator_dual(s)
        assert len(ann) == ring.size
        for f in ann.vectors():
            assert dual_pairing(ring, v, f) == 0


@pytest.mark.parametrize("spec", ["F_3", "Z/4", "UT2(F_2)"])
def test_inverse_transpose_preserves_pairing(spec):
    ring = parse_ring(spec)
    op = opposite(ring)
    one, zero = ring.one, 0
    m = [[one, one], [zero, one]]
    it = inverse_transpose(ring, m)
    for x in itertools.product(range(ring.size), repeat=2):
        for f in itertools.product(range(ring.size), repeat=2):
            assert dual_pairing(ring, vec_mat(ring, x, m), vec_mat(op, f, it)) == dual_pairing(ring, x, f)


def test_matrix_text_roundtrip():
    m = ((1, 2), (3, 0))
    assert tuple(map(tuple, parse_matrix(format_matrix(m)))) == m
