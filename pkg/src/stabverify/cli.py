"""Batch command-line front end."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Sequence

import yaml

from . import __version__
from .builders import (
    ComplexRequest,
    build_basis_complex,
    build_BX,
    build_frames,
    build_splitting,
    build_tits,
)
from .cache import CACHE_ENV, Cache
from .grouphom import stability_table
from .homology import CoefficientDomain, HomologyError, reduced_homology, relative_homology
from .linalg import span_submodule, unit_vector
from .rings import RingError, check_stable_rank_one, parse_ring, ring_axiom_failures
from .steinberg import charney_module, steinberg_module
from .suite import (
    ANCHORS,
    GUARD_ERRORS,
    Record,
    check_apartments,
    criteria_tasks,
    run_check,
    run_tasks,
    verify_coinvariants_vanish,
    verify_relative_generate,
)

SCHEMA_VERSION = 1
COMPLEX_KINDS = ("B", "U", "BX", "T", "SE1", "F", "coF")
MODULE_KINDS = ("St", "Ch", "ChW")
log = logging.getLogger("stabverify")


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ring", default="F_2", help="ring spec: Z/N, F_q, prod(..), UT<k>(R), op(R)")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--coeff", default="Z", help="Z, Q, Fp:<p> or half")
    p.add_argument("--max-degree", type=int, default=None)
    p.add_argument("--guard", type=int, default=None, help="element-count guard for enumerations")
    p.add_argument("--out", default=None, help="report path (stdout when omitted)")
    p.add_argument("--cache", default=None, help="cache directory (overridden by STABVERIFY_CACHE)")
    p.add_argument("--cache-mode", choices=("read", "write", "off"), default="write")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None, help="YAML or JSON file of flag defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stabverify", description="Finite-ring homology verification toolkit")
    parser.add_argument("--version", action="version", version=f"stabverify {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ring", help="parse and validate a ring")
    _common(p)
    p.add_argument("--spec", default=None)

    for name, hlp in (("build", "build a complex and report its f-vector"),
                      ("homology", "reduced homology of a complex"),
                      ("verify-cm", "homology-level Cohen-Macaulay check")):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        p.add_argument("--complex", choices=COMPLEX_KINDS, default="B")
        if name == "homology":
            p.add_argument("--relative-to", choices=("B", "Bn"), default=None,
                           help="relative homology of BX against B^m_n or B_n")

    p = sub.add_parser("steinberg", help="Steinberg module and apartment generation")
    _common(p)
    p = sub.add_parser("relative-generators", help="relative symbol classes span St_n^m")
    _common(p)
    p = sub.add_parser("charney", help="Charney module, absolute or relative to <e_n>")
    _common(p)
    p.add_argument("--relative", action="store_true", help="use W = <e_n>")
    p = sub.add_parser("coinvariants", help="coinvariants of a Steinberg-like module")
    _common(p)
    p.add_argument("--module", choices=MODULE_KINDS, default="St")
    p = sub.add_parser("stability", help="homological stability table for GL_n")
    _common(p)
    p = sub.add_parser("suite", help="run an acceptance battery")
    _common(p)
    p.add_argument("--profile", default="smoke")
    return parser


def _load_config(path: str) -> dict:
    text = Path(path).read_text()
    data = json.loads(text) if path.endswith(".json") else yaml.safe_load(text)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a mapping of flag names to values")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config = _load_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
        known = {a.dest for a in sub._actions}  # noqa: SLF001
        unknown = sorted(set(config) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------- complexes


def _expected_dim(kind: str, n: int, m: int) -> int:
    if kind == "T":
        return n - 2 if m == 0 else n - 1
    if kind == "SE1":
        return n - 2
    return n - 1


def get_complex(kind: str, ring, n: int, m: int, cache: Cache, guard: int | None = None):
    request_kind = {"U": "B", "T": "Trel" if m else "T", "B": "Brel" if m else "B"}.get(kind, kind)
    ComplexRequest(ring, n, m, request_kind, **({"guard": guard} if guard else {})).validate()
    key = Cache.key("complex", kind=kind, ring=ring.name, n=n, m=m)
    builders = {
        "B": lambda: build_basis_complex(ring, n, m, method="both"),
        "U": lambda: build_basis_complex(ring, n, m, method="U"),
        "BX": lambda: build_BX(ring, n, m),
        "T": lambda: build_tits(ring, n, m).order_complex(),
        "SE1": lambda: build_splitting(ring, n).order_complex(),
        "F": lambda: build_frames(ring, n),
        "coF": lambda: build_frames(ring, n, coframe=True),
    }
    return cache.complex(key, ring, builders[kind])


# ---------------------------------------------------------------- commands


def _record(name: str, anchor: str, ok: bool, witness: dict, t0: float) -> Record:
    return Record(name, anchor, "pass" if ok else "fail", witness, round(time.perf_counter() - t0, 3))


def cmd_ring(args) -> list[Record]:
    t0 = time.perf_counter()
    ring = parse_ring(args.spec or args.ring, **({"guard": args.guard} if args.guard else {}))
    failures = ring_axiom_failures(ring)
    witness = {**ring.to_json(), "size": ring.size, "units": len(ring.units()), "field": ring.is_field,
               "stable_rank_one": check_stable_rank_one(ring), "axiom_failures": failures[:5]}
    return [_record(f"ring {ring.name}", "plumbing", not failures, witness, t0)]


def cmd_build(args, cache: Cache) -> list[Record]:
    t0 = time.perf_counter()
    ring = parse_ring(args.ring)
    x = get_complex(args.complex, ring, args.n, args.m, cache, args.guard)
    anchor = "B-equals-U" if args.complex == "B" else "plumbing"
    witness = {"complex": x.name, "f_vector": list(x.f_vector()), "dimension": x.dim,
               "meta": {k: v for k, v in x.meta.items() if isinstance(v, (int, str))}}
    return [_record(f"build {args.complex} n={args.n} m={args.m}", anchor, True, witness, t0)]


def cmd_homology(args, cache: Cache) -> list[Record]:
    t0 = time.perf_counter()
    ring = parse_ring(args.ring)
    coeff = CoefficientDomain.parse(args.coeff)
    x = get_complex(args.complex, ring, args.n, args.m, cache, args.guard)
    if args.relative_to:
        if args.complex != "BX":
            raise UsageError("--relative-to needs --complex BX")
        from .builders import basis_vertex_map, same_vertex_map

        if args.relative_to == "B":
            a = build_basis_complex(ring, args.n, args.m, method="B")
            vm = same_vertex_map(a, x)
        else:
            a = build_basis_complex(ring, args.n, 0, method="B")
            vm = basis_vertex_map(a, x, args.m)
        h = relative_homology(x, a, coeff, vertex_map=vm, max_degree=args.max_degree)
        ok = all(v.is_zero() for k, v in h.items() if k < args.n)
        witness = {"relative_homology": {str(k): v.to_json() for k, v in h.items()}}
        return [_record(f"relative homology BX vs {args.relative_to}", "BX-relative-vanishing", ok, witness, t0)]
    h = reduced_homology(x, coeff, args.max_degree)
    witness = {"complex": x.name, "coeff": str(coeff), "reduced_homology": {str(k): v.to_json() for k, v in h.items()}}
    return [_record(f"homology {x.name}", "plumbing", True, witness, t0)]


def cmd_verify_cm(args, cache: Cache) -> list[Record]:
    from .homology import verify_cm

    def check():
        ring = parse_ring(args.ring)
        x = get_complex(args.complex, ring, args.n, args.m, cache, args.guard)
        r = verify_cm(x, _expected_dim(args.complex, args.n, args.m))
        return bool(r.ok), {"f_vector": list(x.f_vector()), "detail": r.detail, "flag": "homology-proxy",
                            "witness": None if r.ok else repr(r.witness)}

    return [run_check(f"CM {args.complex} n={args.n} m={args.m} ({args.ring})", "cohen-macaulay", check)]


def cmd_steinberg(args) -> list[Record]:
    def module():
        st = steinberg_module(parse_ring(args.ring), args.n, args.m)
        return bool(st.spherical), {**st.summary(), "detail": st.spherical.detail, "flag": "homology-proxy"}

    recs = [run_check(f"St_{args.n}^{args.m}({args.ring})", "steinberg-rank", module)]
    if args.m == 0:
        recs.append(run_check(f"apartments {args.ring} n={args.n}", "apartments-generate",
                              check_apartments, args.ring, args.n))
    else:
        recs.append(run_check(f"symbols {args.ring} (m,n)=({args.m},{args.n})", "relative-symbols-generate",
                              lambda: (lambda r: (r.ok, r.to_json()))(
                                  verify_relative_generate(parse_ring(args.ring), args.n, args.m))))
    return recs


def cmd_relative_generators(args) -> list[Record]:
    m = args.m or 1

    def check():
        r = verify_relative_generate(parse_ring(args.ring), args.n, m)
        return r.ok, r.to_json()

    return [run_check(f"symbols {args.ring} (m,n)=({m},{args.n})", "relative-symbols-generate", check)]


def _module_for(args, kind: str):
    ring = parse_ring(args.ring)
    if kind == "St":
        return steinberg_module(ring, args.n, args.m)
    if kind == "Ch":
        return charney_module(ring, args.n)
    W = span_submodule(ring, [unit_vector(ring, args.n, args.n - 1)], args.n)
    return charney_module(ring, args.n, W)


def _coinvariant_check(args, kind: str):
    coeff = CoefficientDomain.parse(args.coeff)

    def check():
        st = _module_for(args, kind)
        r = verify_coinvariants_vanish(st)
        if coeff.kind == "Z":
            special, ok = r.coinvariants, r.ok
        else:
            special = r.coinvariants.specialize(coeff)
            ok = special.is_zero()
        return ok, {**r.to_json(), **st.summary(), "coeff": str(coeff), "specialized": special.to_json()}

    return check


def cmd_charney(args) -> list[Record]:
    kind = "ChW" if args.relative else "Ch"
    return [run_check(f"{kind} n={args.n} ({args.ring})", "coinvariants-vanish", _coinvariant_check(args, kind))]


def cmd_coinvariants(args) -> list[Record]:
    return [run_check(f"coinvariants {args.module} n={args.n} m={args.m} ({args.ring}) {args.coeff}",
                      "coinvariants-vanish", _coinvariant_check(args, args.module))]


def cmd_stability(args) -> tuple[list[Record], str]:
    coeff = CoefficientDomain.parse(args.coeff)
    holder: dict = {}

    def check():
        kw = {"guard": args.guard} if args.guard else {}
        t = stability_table(parse_ring(args.ring), args.n, args.max_degree if args.max_degree is not None else 1,
                            coeff, **kw)
        holder["csv"] = t.to_csv()
        return t.ok, t.to_json()

    rec = run_check(f"stability GL_n({args.ring}) n<={args.n} {coeff}", "stability-range", check)
    return [rec], holder.get("csv", "")


def cmd_suite(args) -> list[Record]:
    return run_tasks(criteria_tasks(args.profile), args.workers)


# ---------------------------------------------------------------- report


def make_report(args, records: list[Record]) -> dict:
    statuses = [r.status for r in records]
    overall = "pass" if all(s in ("pass", "infeasible") for s in statuses) else "fail"
    argdict = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "cache", "config", "workers")}
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": args.command,
        "ring": getattr(args, "spec", None) or args.ring,
        "arguments": argdict,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "status": overall,
        "records": [r.to_json() for r in records],
        "anchors": {r.anchor: ANCHORS[r.anchor] for r in records},
    }


def _write(report: dict, out: str | None, csv_text: str = "") -> None:
    text = json.dumps(report, indent=2, default=str) + "\n"
    if out:
        Path(out).write_text(text)
        if csv_text:
            Path(out).with_suffix(".csv").write_text(csv_text)
    else:
        sys.stdout.write(text)
        if csv_text:
            sys.stdout.write(csv_text)


def run(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        if getattr(args, "ring", None) and args.command not in ("ring", "suite"):
            parse_ring(args.ring)
    except (UsageError, RingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cache = Cache(args.cache, args.cache_mode if (args.cache or os.environ.get(CACHE_ENV)) else "off")
    csv_text = ""
    try:
        if args.command == "ring":
            records = cmd_ring(args)
        elif args.command == "build":
            records = cmd_build(args, cache)
        elif args.command == "homology":
            records = cmd_homology(args, cache)
        elif args.command == "verify-cm":
            records = cmd_verify_cm(args, cache)
        elif args.command == "steinberg":
            records = cmd_steinberg(args)
        elif args.command == "relative-generators":
            records = cmd_relative_generators(args)
        elif args.command == "charney":
            records = cmd_charney(args)
        elif args.command == "coinvariants":
            records = cmd_coinvariants(args)
        elif args.command == "stability":
            records, csv_text = cmd_stability(args)
        else:
            records = cmd_suite(args)
    except GUARD_ERRORS as exc:
        records = [Record(args.command, "plumbing", "infeasible", {"reason": str(exc)})]
    except (RingError, UsageError, HomologyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = make_report(args, records)
    _write(report, args.out, csv_text)
    return 0 if report["status"] == "pass" else 1


def main() -> None:
    sys.exit(run())
