import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabverify.groups import abelianization, embed_block, enumerate_gl, stabilizer_subgroup
from stabverify.grouphom import (
    BarComplex,
    GroupHomologyError,
    Infeasible,
    bar_homology,
    relative_group_homology,
    stability_table,
    trivial_group,
)
from stabverify.homology import HALF, Z, Fp, HomologyResult
from stabverify.linalg import unit_vector
from stabverify.rings import parse_ring


def _gl(spec, n):
    return enumerate_gl(parse_ring(spec), n)


def test_symmetric_group_s3():
    h = bar_homology(_gl("F_2", 2), Z, 3)
    assert h[0] == HomologyResult(1)
    assert h[1] == HomologyResult(0, (2,))
    assert h[2] == HomologyResult(0)
    assert h[3] == HomologyResult(0, (6,))


@pytest.mark.parametrize("q", [3, 4, 5, 7])
def test_cyclic_groups(q):
    g = _gl(f"F_{q}", 1)
    h = bar_homology(g, Z, 3)
    assert h[1] == HomologyResult(0, (q - 1,))
    assert h[2] == HomologyResult(0)
    assert h[3] == HomologyResult(0, (q - 1,))


@pytest.mark.parametrize("spec,n", [("F_2", 2), ("F_3", 1), ("F_4", 1), ("Z/4", 1), ("F_5", 1), ("Z/9", 1)])
def test_h1_is_abelianization(spec, n):
    g = _gl(spec, n)
    assert bar_homology(g, Z, 1)[1] == abelianization(g)


def test_bar_complex_dd():
    assert BarComplex(_gl("F_2", 2), 4).chain_complex().check_dd()


@given(st.sampled_from([("F_2", 2), ("F_3", 1), ("F_5", 1), ("F_7", 1)]), st.sampled_from([2, 3, 5]))
def test_universal_coefficients(pair, p):
    g = _gl(*pair)
    hz = bar_homology(g, Z, 2)
    hp = bar_homology(g, Fp(p), 2)
    for k in (1, 2):
        want = hz[k].rank + sum(t % p == 0 for t in hz[k].torsion) + sum(t % p == 0 for t in hz[k - 1].torsion)
        assert hp[k].rank == want


def _pairs():
    f2, f3 = parse_ring("F_2"), parse_ring("F_3")
    g2 = enumerate_gl(f2, 2)
    g3 = enumerate_gl(f3, 2)
    return {
        "GL1<GL2(F_2)": (g2, enumerate_gl(f2, 1), lambda a: embed_block(f2, a, 2)),
        "stab<GL2(F_3)": (g3, stabilizer_subgroup(g3, [unit_vector(f3, 2, 0)]), None),
        "1<GL2(F_2)": (g2, trivial_group(f2, 2), None),
        "GL2(F_2)<GL2(F_2)": (g2, g2, None),
    }


PAIRS = _pairs()


@given(st.sampled_from(sorted(PAIRS)), st.sampled_from([3, 5]))
def test_long_exact_sequence_bounds(name, p):
    g, h, emb = PAIRS[name]
    k = Fp(p)
    hg, hh = bar_homology(g, k, 2), bar_homology(h, k, 2)
    rel = relative_group_homology(g, h, k, 2, emb)
    for i in (1, 2):
        assert hg[i].rank <= hh[i].rank + rel[i].rank
        assert rel[i].rank <= hg[i].rank + hh[i - 1].rank


def test_relative_to_itself_vanishes():
    g, h, _ = PAIRS["GL2(F_2)<GL2(F_2)"]
    rel = relative_group_homology(g, h, Z, 2)
    assert all(v.is_zero() for v in rel.values())


def test_relative_to_trivial_is_reduced_homology():
    g, h, _ = PAIRS["1<GL2(F_2)"]
    rel = relative_group_homology(g, h, Z, 2)
    assert rel[0].is_zero()
    assert rel[1] == HomologyResult(0, (2,))


def test_coefficient_necessity():
    g, h, emb = PAIRS["GL1<GL2(F_2)"]
    assert relative_group_homology(g, h, Z, 1, emb)[1] == HomologyResult(0, (2,))
    assert relative_group_homology(g, h, Fp(3), 1, emb)[1].is_zero()
    assert relative_group_homology(g, h, HALF, 1, emb)[1].is_zero()


def test_non_subgroup_rejected():
    f2 = parse_ring("F_2")
    g = enumerate_gl(f2, 2)
    with pytest.raises(GroupHomologyError):
        relative_group_homology(trivial_group(f2, 2), g, Z, 1)


def test_infeasible_guard():
    with pytest.raises(Infeasible):
        bar_homology(_gl("F_2", 3), Z, 3, guard=1000)


@pytest.mark.parametrize("p", [3, 5])
def test_stability_table_consistent(p):
    t = stability_table(parse_ring("F_2"), 3, 2, Fp(p))
    assert t.ok and t.admissible
    verdicts = {(c.n, c.i): c.verdict for c in t.cells}
    assert verdicts[(2, 1)] == "consistent"
    assert verdicts[(3, 1)] == "consistent"
    assert verdicts[(3, 2)] == "infeasible"
    assert t.to_csv().splitlines()[0] == "n,i,dim_prev,dim_cur,dim_rel_i,verdict"


def test_stability_without_two_inverted():
    t = stability_table(parse_ring("F_2"), 2, 1, Z)
    assert not t.admissible
    verdicts = {(c.n, c.i): c.verdict for c in t.cells}
    assert verdicts[(2, 1)] == "nonzero-without-2-inverted"
