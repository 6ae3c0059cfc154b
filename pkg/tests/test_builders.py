import pytest

from stabverify.builders import (
    BuilderError,
    ComplexRequest,
    basis_vertex_map,
    build_basis_complex,
    build_BX,
    build_frames,
    build_splitting,
    build_tits,
    cutting_down_iso,
    dual_tits_iso,
    dualizing_splitting_iso,
    frame_coframe_iso,
    free_summands,
    gl_sample,
    same_vertex_map,
    verify_fiber_isos,
)
from stabverify.homology import Z, reduced_homology, relative_homology, verify_cm, verify_spherical
from stabverify.linalg import GuardExceeded, span_submodule, unit_vector
from stabverify.rings import parse_ring


def gaussian(n, k, q):
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


@pytest.mark.parametrize("spec,n,f", [
    ("F_2", 2, (3, 3)),
    ("F_2", 3, (7, 21, 28)),
    ("F_3", 2, (8, 24)),
    ("F_3", 3, (26, 312, 1872)),
    ("Z/4", 2, (12, 48)),
    ("Z/4", 3, (56, 1344, 14336)),
])
def test_basis_complex_f_vectors(spec, n, f):
    assert build_basis_complex(parse_ring(spec), n).f_vector() == f


@pytest.mark.parametrize("spec,n", [("F_2", 2), ("F_2", 3), ("F_3", 2), ("Z/4", 2), ("Z/6", 2),
                                    ("UT2(F_2)", 2), ("op(UT2(F_2))", 2), ("F_4", 2)])
def test_partial_basis_equals_unimodular(spec, n):
    x = build_basis_complex(parse_ring(spec), n, method="both")
    assert x.f_vector()


@pytest.mark.parametrize("spec,n", [("F_2", 3), ("F_3", 2), ("Z/4", 2), ("UT2(F_2)", 2)])
def test_basis_complex_cohen_macaulay(spec, n):
    assert verify_cm(build_basis_complex(parse_ring(spec), n), n - 1)


def test_relative_basis_complex_top_facets():
    ring = parse_ring("F_2")
    x = build_basis_complex(ring, 2, 1)
    assert x.dim == 1
    assert verify_cm(x, 1)


def test_bx_not_spherical():
    x = build_BX(parse_ring("F_2"), 2, 1)
    h = reduced_homology(x, Z)
    assert not h[1].is_zero()
    assert not verify_spherical(x, 2)


@pytest.mark.parametrize("spec,m,n", [("F_2", 1, 1), ("F_2", 1, 2), ("F_3", 1, 1)])
def test_bx_relative_vanishing(spec, m, n):
    ring = parse_ring(spec)
    x = build_BX(ring, n, m)
    a = build_basis_complex(ring, n, m)
    b = build_basis_complex(ring, n, 0)
    h1 = relative_homology(x, a, Z, vertex_map=same_vertex_map(a, x), max_degree=n - 1)
    h2 = relative_homology(x, b, Z, vertex_map=basis_vertex_map(b, x, m), max_degree=n - 1)
    assert all(h1[k].is_zero() for k in range(n))
    assert all(h2[k].is_zero() for k in range(n))


@pytest.mark.parametrize("q,n", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)])
def test_tits_counts_subspaces(q, n):
    p = build_tits(parse_ring(f"F_{q}"), n)
    assert len(p) == sum(gaussian(n, k, q) for k in range(1, n))
    assert p.check()


def test_tits_over_z4_counts_free_summands():
    p = build_tits(parse_ring("Z/4"), 2)
    assert len(p) == 6


@pytest.mark.parametrize("spec,n", [("F_2", 3), ("F_3", 3), ("Z/4", 2)])
def test_tits_cohen_macaulay(spec, n):
    assert verify_cm(build_tits(parse_ring(spec), n).order_complex(), n - 2)


def test_free_summands_match_tits():
    ring = parse_ring("F_3")
    assert len(free_summands(ring, 3, [1, 2])) == len(build_tits(ring, 3))


@pytest.mark.parametrize("spec,n,verts", [("F_2", 2, 6), ("F_3", 2, 12), ("Z/4", 2, 24)])
def test_splitting_poset_size(spec, n, verts):
    assert len(build_splitting(parse_ring(spec), n)) == verts


def test_splitting_spherical():
    x = build_splitting(parse_ring("F_2"), 3).order_complex()
    assert verify_spherical(x, 1)


@pytest.mark.parametrize("spec,n,f", [("F_2", 2, (3, 3)), ("F_2", 3, (7, 21, 28)), ("F_3", 2, (4, 6))])
def test_frames(spec, n, f):
    assert build_frames(parse_ring(spec), n).f_vector() == f


@pytest.mark.parametrize("spec,n", [("F_2", 3), ("F_3", 2), ("Z/4", 2)])
def test_frame_coframe_iso(spec, n):
    assert frame_coframe_iso(parse_ring(spec), n).is_isomorphism()


@pytest.mark.parametrize("spec,n", [("F_2", 3), ("F_3", 2), ("Z/4", 2), ("UT2(F_2)", 2)])
def test_dual_tits_iso(spec, n):
    ring = parse_ring(spec)
    _, rep = dual_tits_iso(ring, n, gl_sample(ring, n, 4))
    assert rep["isomorphism"] and not rep["failures"]


def test_splitting_isos():
    ring = parse_ring("F_2")
    e = [unit_vector(ring, 3, i) for i in range(3)]
    V = span_submodule(ring, e[:1], 3)
    W = span_submodule(ring, e[2:], 3)
    C = span_submodule(ring, e[:2], 3)
    assert cutting_down_iso(V, W, C).ok
    assert dualizing_splitting_iso(V, 3).ok


@pytest.mark.parametrize("spec,n,m", [("F_2", 3, 0), ("F_3", 2, 1)])
def test_fiber_isos(spec, n, m):
    assert verify_fiber_isos(parse_ring(spec), n, m)["ok"]


def test_request_validation():
    ring = parse_ring("F_2")
    with pytest.raises(BuilderError):
        ComplexRequest(ring, 2, kind="nope").build()
    with pytest.raises(BuilderError):
        ComplexRequest(ring, 2, 0, kind="BX").build()
    with pytest.raises(GuardExceeded):
        ComplexRequest(ring, 30, kind="B").build()
    assert ComplexRequest(ring, 2, kind="T").build()


def test_eligibility_violation_reported(monkeypatch):
    import numpy as np

    from stabverify import builders
    from stabverify.builders import EligibilityViolation
    from stabverify.suite import check_b_equals_u, run_check

    real = builders._u_simplices

    def drop_one_edge(*args, **kwargs):
        levels = real(*args, **kwargs)
        return [levels[0], levels[1][1:]] + [np.asarray(a) for a in levels[2:]]

    monkeypatch.setattr(builders, "_u_simplices", drop_one_edge)
    with pytest.raises(EligibilityViolation) as err:
        build_basis_complex(parse_ring("F_2"), 2)
    assert err.value.witness
    rec = run_check("B=U F_2 n=2", "B-equals-U", check_b_equals_u, "F_2", 2)
    assert rec.status == "fail"
    assert "witness" in rec.witness
