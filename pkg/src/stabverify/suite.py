"""Check battery shared by the command line and the acceptance tests."""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

from .builders import (
    EligibilityViolation,
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
    gl_sample,
    same_vertex_map,
    verify_fiber_isos,
)
from .grouphom import Infeasible, embed_block, relative_group_homology, stability_table
from .groups import GroupError, enumerate_gl
from .homology import (
    Z,
    CoefficientDomain,
    chain_complex_of,
    determinantal_divisors,
    reduced_homology,
    relative_homology,
    smith_normal_form,
    verify_cm,
)
from .linalg import GuardExceeded, mat_mul, span_submodule, unit_vector
from .rings import RingError, parse_ring
from .steinberg import (
    SteinbergError,
    charney_module,
    steinberg_module,
    verify_apartments_generate,
    verify_coinvariants_vanish,
    verify_relative_generate,
)

ANCHORS = {
    "B-equals-U": "partial-basis complex coincides with the unimodular-summand complex",
    "cohen-macaulay": "basis complexes and Tits complexes are Cohen-Macaulay (homology level)",
    "BX-not-spherical": "augmented basis complexes can fail to be spherical",
    "BX-relative-vanishing": "relative homology of augmented basis pairs vanishes below n",
    "steinberg-rank": "rank of the Steinberg module",
    "apartments-generate": "apartment classes span the St_n lattice, compatibly with the group action",
    "relative-symbols-generate": "relative symbol classes span the St_n^m lattice",
    "coinvariants-vanish": "coinvariants of Steinberg and Charney modules vanish once 2 is inverted",
    "coefficient-necessity": "relative group homology of GL_1 in GL_2 over F_2 is nonzero integrally",
    "stability-range": "H_i(GL_n, GL_{n-1}) vanishes for i <= n-1 once 2 is invertible",
    "duality": "order and simplicial isomorphisms between posets over R and over R^op",
    "plumbing": "artifact infrastructure self-check",
}

STATUSES = ("pass", "fail", "infeasible")
DESK_RINGS = ("F_2", "F_3", "F_4", "Z/4", "Z/6", "UT2(F_2)")
DUALITY_RINGS = ("F_2", "F_3", "F_4", "Z/4", "UT2(F_2)", "op(UT2(F_2))")
GUARD_ERRORS = (Infeasible, GuardExceeded)


@dataclass
class Record:
    name: str
    anchor: str
    status: str
    witness: dict = field(default_factory=dict)
    wall_time: float = 0.0
    criterion: int | None = None

    def to_json(self) -> dict:
        return asdict(self)


def run_check(name: str, anchor: str, fn: Callable, *args, criterion: int | None = None) -> Record:
    if anchor not in ANCHORS:
        raise KeyError(f"unregistered anchor {anchor!r}")
    t = time.perf_counter()
    try:
        ok, witness = fn(*args)
        status = "pass" if ok else "fail"
    except GUARD_ERRORS as exc:
        status, witness = "infeasible", {"reason": str(exc)}
    except (GroupError, SteinbergError, RingError) as exc:
        if "guard" in str(exc):
            status, witness = "infeasible", {"reason": str(exc)}
        else:
            status, witness = "fail", {"error": f"{type(exc).__name__}: {exc}"}
    except EligibilityViolation as exc:
        status, witness = "fail", {"error": str(exc), "witness": repr(exc.witness)}
    return Record(name, anchor, status, witness, round(time.perf_counter() - t, 3), criterion)


def _h(res) -> str:
    return str(res)


# ---------------------------------------------------------------- individual checks


def check_b_equals_u(spec: str, n: int) -> tuple[bool, dict]:
    x = build_basis_complex(parse_ring(spec), n, 0, method="both")
    return True, {"f_vector": list(x.f_vector())}


def check_cm_basis(spec: str, n: int, m: int = 0) -> tuple[bool, dict]:
    x = build_basis_complex(parse_ring(spec), n, m, method="B")
    r = verify_cm(x, n - 1)
    return bool(r.ok), {"f_vector": list(x.f_vector()), "detail": r.detail, "flag": "homology-proxy",
                        "witness": repr(r.witness) if not r.ok else None}


def check_cm_tits(spec: str, n: int, m: int = 0) -> tuple[bool, dict]:
    x = build_tits(parse_ring(spec), n, m).order_complex()
    d = n - 2 if m == 0 else n - 1
    r = verify_cm(x, d)
    return bool(r.ok), {"f_vector": list(x.f_vector()), "detail": r.detail, "flag": "homology-proxy"}


def check_bx_not_spherical(spec: str = "F_2") -> tuple[bool, dict]:
    x = build_BX(parse_ring(spec), 2, 1)
    h = reduced_homology(x, Z)
    return not h[1].is_zero(), {"f_vector": list(x.f_vector()), "H1": _h(h[1]), "H2": _h(h.get(2))}


def check_bx_relative(spec: str, m: int, n: int) -> tuple[bool, dict]:
    ring = parse_ring(spec)
    x = build_BX(ring, n, m)
    a = build_basis_complex(ring, n, m, method="B")
    b = build_basis_complex(ring, n, 0, method="B")
    h1 = relative_homology(x, a, Z, vertex_map=same_vertex_map(a, x), max_degree=n - 1)
    h2 = relative_homology(x, b, Z, vertex_map=basis_vertex_map(b, x, m), max_degree=n - 1)
    ok = all(h1[k].is_zero() for k in range(n)) and all(h2[k].is_zero() for k in range(n))
    return ok, {"rel_B^m_n": {k: _h(v) for k, v in h1.items()}, "rel_B_n": {k: _h(v) for k, v in h2.items()}}


def check_steinberg_rank(spec: str, n: int, expected: int) -> tuple[bool, dict]:
    from .oracles import tits_reduced_homology

    ring = parse_ring(spec)
    st = steinberg_module(ring, n)
    x = st.complex
    engine = reduced_homology(x, Z)[n - 2]
    oracle_rank, oracle_torsion = tits_reduced_homology(ring, n)
    ok = st.rank == engine.rank == oracle_rank == expected and not engine.torsion and not oracle_torsion
    return ok, {"module_rank": st.rank, "engine": _h(engine), "oracle_rank": oracle_rank,
                "oracle_torsion": oracle_torsion, "expected": expected}


def check_apartments(spec: str, n: int) -> tuple[bool, dict]:
    r = verify_apartments_generate(parse_ring(spec), n)
    return r.ok, r.to_json()


def check_relative_generate(spec: str, n: int, m: int) -> tuple[bool, dict]:
    r = verify_relative_generate(parse_ring(spec), n, m)
    return r.ok, r.to_json()


def _module(spec: str, kind: str, n: int, m: int):
    ring = parse_ring(spec)
    if kind == "St":
        return steinberg_module(ring, n, m)
    if kind == "Ch":
        return charney_module(ring, n)
    if kind == "ChW":
        W = span_submodule(ring, [unit_vector(ring, n, n - 1)], n)
        return charney_module(ring, n, W)
    raise ValueError(f"unknown module kind {kind!r}")


def check_coinvariants(spec: str, kind: str, n: int, m: int = 0) -> tuple[bool, dict]:
    st = _module(spec, kind, n, m)
    r = verify_coinvariants_vanish(st)
    return r.ok, {**r.to_json(), **st.summary()}


def check_st11_exact(spec: str = "F_2") -> tuple[bool, dict]:
    st = steinberg_module(parse_ring(spec), 1, 1)
    r = verify_coinvariants_vanish(st)
    co = r.coinvariants
    return co.rank == 0 and tuple(co.torsion) == (2,) and r.ok, r.to_json()


def check_coefficient_necessity() -> tuple[bool, dict]:
    ring = parse_ring("F_2")
    g, h = enumerate_gl(ring, 2), enumerate_gl(ring, 1)
    emb = lambda a: embed_block(ring, a, 2)  # noqa: E731
    over_z = relative_group_homology(g, h, Z, 1, emb)[1]
    over_3 = relative_group_homology(g, h, CoefficientDomain("Fp", 3), 1, emb)[1]
    return (not over_z.is_zero()) and over_3.is_zero(), {"Z": _h(over_z), "Fp:3": _h(over_3)}


def check_stability(spec: str, n_max: int, i_max: int, coeff: str) -> tuple[bool, dict]:
    t = stability_table(parse_ring(spec), n_max, i_max, CoefficientDomain.parse(coeff))
    return t.ok, {**t.to_json(), "csv": t.to_csv()}


def _twist(ring, vectors, g):
    return [mat_mul(ring, (v,), g)[0] for v in vectors]


def check_duality(spec: str, n: int) -> tuple[bool, dict]:
    ring = parse_ring(spec)
    f, rep = dual_tits_iso(ring, n, gl_sample(ring, n, 6))
    tits_ok = bool(rep["isomorphism"]) and not rep["failures"]
    fc_ok = frame_coframe_iso(ring, n).is_isomorphism()
    instances = failures = 0
    for g in gl_sample(ring, n, 3, seed=1):
        e = [unit_vector(ring, n, i) for i in range(n)]
        for a in range(1, n):
            V = span_submodule(ring, _twist(ring, e[:a], g), n)
            for b in range(1, n - a):
                W = span_submodule(ring, _twist(ring, e[n - b:], g), n)
                C = span_submodule(ring, _twist(ring, e[:n - b], g), n)
                instances += 1
                failures += not cutting_down_iso(V, W, C).ok
            instances += 1
            failures += not dualizing_splitting_iso(V, n).ok
    ok = tits_ok and fc_ok and failures == 0
    return ok, {"dual_tits": tits_ok, "equivariance_checks": rep["equivariance_checks"],
                "frame_coframe": fc_ok, "splitting_instances": instances, "splitting_failures": failures}


def check_fibers(spec: str, n: int, m: int = 0) -> tuple[bool, dict]:
    r = verify_fiber_isos(parse_ring(spec), n, m)
    return r["ok"], r


def _desk_complexes():
    for spec in ("F_2", "F_3", "Z/4"):
        ring = parse_ring(spec)
        for n in (1, 2, 3):
            yield build_basis_complex(ring, n, 0, method="B")
        for n in (2, 3):
            yield build_tits(ring, n).order_complex()
            yield build_splitting(ring, n).order_complex()
            yield build_frames(ring, n)
        for m, n in ((1, 1), (1, 2), (2, 1)):
            yield build_BX(ring, n, m)
            yield build_tits(ring, n, m).order_complex()


def check_engine(samples: int = 500, seed: int = 0) -> tuple[bool, dict]:
    rng = random.Random(seed)
    snf_fail = 0
    for _ in range(samples):
        r, c = rng.randint(1, 8), rng.randint(1, 8)
        a = [[rng.randint(-10, 10) for _ in range(c)] for _ in range(r)]
        want = tuple(x for x in determinantal_divisors(a) if x)
        got = tuple(smith_normal_form(a)[0])
        snf_fail += got != want
    dd_fail = euler_fail = complexes = 0
    for x in _desk_complexes():
        complexes += 1
        cc = chain_complex_of(x, reduced=False, check=False)
        dd_fail += not cc.check_dd()
        h = reduced_homology(x, Z)
        betti = sum((1 if k % 2 == 0 else -1) * v.rank for k, v in h.items())
        euler_fail += betti != x.euler_characteristic() - 1
    ok = snf_fail == 0 and dd_fail == 0 and euler_fail == 0
    return ok, {"snf_samples": samples, "snf_failures": snf_fail, "complexes": complexes,
                "dd_failures": dd_fail, "euler_failures": euler_fail}


# ---------------------------------------------------------------- batteries

Task = tuple[str, str, Callable, tuple, int]


def criteria_tasks(profile: str) -> list[Task]:
    """``(name, anchor, function, args, criterion)`` for the given profile."""
    if profile == "smoke":
        return [
            ("B=U F_2 n=2", "B-equals-U", check_b_equals_u, ("F_2", 2), 1),
            ("CM B_2(F_2)", "cohen-macaulay", check_cm_basis, ("F_2", 2), 2),
            ("BX^1_2(F_2) not spherical", "BX-not-spherical", check_bx_not_spherical, ("F_2",), 3),
            ("BX relative F_2 (1,1)", "BX-relative-vanishing", check_bx_relative, ("F_2", 1, 1), 4),
            ("rank St_2(F_2)", "steinberg-rank", check_steinberg_rank, ("F_2", 2, 2), 5),
            ("apartments F_2 n=2", "apartments-generate", check_apartments, ("F_2", 2), 6),
            ("symbols F_2 (1,1)", "relative-symbols-generate", check_relative_generate, ("F_2", 1, 1), 7),
            ("coinvariants St_2(F_2)", "coinvariants-vanish", check_coinvariants, ("F_2", "St", 2, 0), 8),
            ("coinvariants St_1^1(F_2) = Z/2", "coinvariants-vanish", check_st11_exact, ("F_2",), 8),
            ("H_1(GL_2, GL_1; F_2)", "coefficient-necessity", check_coefficient_necessity, (), 9),
            ("stability F_2 n<=2 Fp:3", "stability-range", check_stability, ("F_2", 2, 1, "Fp:3"), 10),
            ("duality F_2 n=2", "duality", check_duality, ("F_2", 2), 11),
        ]
    if profile not in ("desk", "extended"):
        raise ValueError(f"unknown profile {profile!r}; choose smoke, desk or extended")
    tasks: list[Task] = []
    for spec in DESK_RINGS:
        for n in (1, 2, 3):
            tasks.append((f"B=U {spec} n={n}", "B-equals-U", check_b_equals_u, (spec, n), 1))
    for spec in DESK_RINGS:
        for n in (1, 2, 3):
            tasks.append((f"CM B_{n}({spec})", "cohen-macaulay", check_cm_basis, (spec, n), 2))
        for n in (2, 3):
            tasks.append((f"CM T_{n}({spec})", "cohen-macaulay", check_cm_tits, (spec, n), 2))
    tasks.append(("BX^1_2(F_2) not spherical", "BX-not-spherical", check_bx_not_spherical, ("F_2",), 3))
    for spec in ("F_2", "F_3"):
        for m, n in ((1, 1), (1, 2), (2, 1)):
            tasks.append((f"BX relative {spec} (m,n)=({m},{n})", "BX-relative-vanishing",
                          check_bx_relative, (spec, m, n), 4))
    for spec, n, r in (("F_2", 2, 2), ("F_2", 3, 8), ("F_3", 2, 3)):
        tasks.append((f"rank St_{n}({spec}) = {r}", "steinberg-rank", check_steinberg_rank, (spec, n, r), 5))
    for spec, n in (("F_2", 2), ("F_2", 3), ("F_3", 2)):
        tasks.append((f"apartments {spec} n={n}", "apartments-generate", check_apartments, (spec, n), 6))
    for spec, n, m in (("F_2", 1, 1), ("F_2", 2, 1), ("F_3", 1, 1)):
        tasks.append((f"symbols {spec} (m,n)=({m},{n})", "relative-symbols-generate",
                      check_relative_generate, (spec, n, m), 7))
    for spec in ("F_2", "F_3"):
        for kind, n, m in (("St", 2, 0), ("St", 3, 0), ("St", 1, 1), ("St", 2, 1),
                           ("Ch", 2, 0), ("Ch", 3, 0), ("ChW", 3, 0)):
            tasks.append((f"coinvariants {kind} n={n} m={m} {spec}", "coinvariants-vanish",
                          check_coinvariants, (spec, kind, n, m), 8))
    tasks.append(("coinvariants St_1^1(F_2) = Z/2", "coinvariants-vanish", check_st11_exact, ("F_2",), 8))
    tasks.append(("H_1(GL_2, GL_1; F_2)", "coefficient-necessity", check_coefficient_necessity, (), 9))
    for coeff in ("Fp:3", "Fp:5"):
        tasks.append((f"stability GL_n(F_2) {coeff}", "stability-range", check_stability,
                      ("F_2", 3, 2, coeff), 10))
    for spec in DUALITY_RINGS:
        for n in (2, 3):
            tasks.append((f"duality {spec} n={n}", "duality", check_duality, (spec, n), 11))
    tasks.append(("engine self-checks", "plumbing", check_engine, (), 12))
    if profile == "extended":
        tasks += [
            ("apartments F_3 n=3", "apartments-generate", check_apartments, ("F_3", 3), None),
            ("symbols F_3 (m,n)=(1,2)", "relative-symbols-generate", check_relative_generate, ("F_3", 2, 1), None),
            ("symbols F_2 (m,n)=(1,3)", "relative-symbols-generate", check_relative_generate, ("F_2", 3, 1), None),
            ("stability GL_n(F_3) Fp:5", "stability-range", check_stability, ("F_3", 2, 2, "Fp:5"), None),
            ("fiber isos T_3(F_2)", "duality", check_fibers, ("F_2", 3, 0), None),
            ("fiber isos T^1_2(F_3)", "duality", check_fibers, ("F_3", 2, 1), None),
            ("CM T^1_2(F_3)", "cohen-macaulay", check_cm_tits, ("F_3", 2, 1), None),
        ]
    return tasks


def _run_task(task: Task) -> Record:
    name, anchor, fn, args, crit = task
    return run_check(name, anchor, fn, *args, criterion=crit)


def run_tasks(tasks: list[Task], workers: int = 1) -> list[Record]:
    if workers <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks))


def suite(profile: str, workers: int = 1) -> list[Record]:
    return run_tasks(criteria_tasks(profile), workers)

