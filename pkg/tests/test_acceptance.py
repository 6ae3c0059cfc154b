"""Desk-scale acceptance battery: one pass/fail line per criterion."""

import pytest

from stabverify.suite import criteria_tasks, run_tasks

TITLES = {
    1: "partial-basis and unimodular-summand complexes coincide",
    2: "basis and Tits complexes are Cohen-Macaulay (homology level)",
    3: "BX^1_2(F_2) has nonzero reduced H_1",
    4: "relative homology of BX vs B^m_n and vs B_n vanishes below n",
    5: "Steinberg ranks 2, 8, 3 agree with the dense oracle",
    6: "apartment classes span the Steinberg lattice",
    7: "relative symbol classes span the relative Steinberg lattice",
    8: "coinvariants vanish with 2 inverted; St^1_1(F_2) coinvariants are Z/2",
    9: "H_1(GL_2(F_2), GL_1(F_2)) is nonzero over Z and zero over F_3",
    10: "stability tables over F_3 and F_5 show no range violation",
    11: "duality isomorphisms hold on every desk instance",
    12: "engine self-checks (dd = 0, SNF vs minors, Euler/Betti)",
}

BUDGET_SECONDS = {1: 60, 2: 300, 3: 30, 4: 300, 5: 120, 6: 300, 7: 600, 8: 600, 9: 60, 10: 1200,
                  11: 600, 12: 120}

LINES: dict[int, str] = {}


@pytest.fixture(scope="module")
def records():
    by_criterion: dict[int, list] = {}
    for r in run_tasks(criteria_tasks("desk"), workers=1):
        by_criterion.setdefault(r.criterion, []).append(r)
    return by_criterion


@pytest.mark.parametrize("criterion", sorted(TITLES))
def test_criterion(records, criterion, capsys):
    recs = records.get(criterion, [])
    elapsed = sum(r.wall_time for r in recs)
    failed = [r for r in recs if r.status != "pass"]
    ok = bool(recs) and not failed and elapsed <= BUDGET_SECONDS[criterion]
    line = (f"criterion {criterion:2d} {'PASS' if ok else 'FAIL'}  {TITLES[criterion]}"
            f"  [{len(recs)} checks, {elapsed:.1f}s of {BUDGET_SECONDS[criterion]}s]")
    LINES[criterion] = line
    with capsys.disabled():
        print("\n" + line)
    assert recs, "no checks registered"
    assert not failed, [(r.name, r.status, r.witness) for r in failed]
    assert elapsed <= BUDGET_SECONDS[criterion]
