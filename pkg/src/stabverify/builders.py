"""Complexes and posets of bases, summands, splittings and frames.

Vectors of ``R^N`` are handled by integer codes (see ``linalg.FreeModule``);
complexes built here carry the vectors (or submodules) as vertex payloads
and list vertices in increasing code order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .complexes import Poset, PosetMap, SimplicialComplex, SimplicialMap, simplex_poset
from .linalg import (
    ELEMENT_SET_GUARD,
    GuardExceeded,
    Submodule,
    annihilator_dual,
    extends_to_basis,
    free_module,
    identity,
    inverse_transpose,
    is_partial_basis,
    mat_inverse,
    unit_vector,
)
from .rings import Ring, eligible, opposite

BUILDER_KINDS = ("B", "Brel", "BX", "T", "Trel", "SE1", "SE1rel", "F", "coF")
FACET_GUARD = 50_000_000  # upper bound on top simplices of basis-type complexes


class BuilderError(ValueError):
    pass


class EligibilityViolation(BuilderError):
    """The partial-basis and unimodular-summand complexes differ."""

    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


@dataclass
class ComplexRequest:
    ring: Ring
    n: int
    m: int = 0
    kind: str = "B"
    gamma: tuple = ()
    V: Submodule | None = None
    W: Submodule | None = None
    guard: int = ELEMENT_SET_GUARD

    def validate(self) -> None:
        if self.kind not in BUILDER_KINDS:
            raise BuilderError(f"unknown builder {self.kind!r}; expected one of {', '.join(BUILDER_KINDS)}")
        if self.n < 0 or self.m < 0:
            raise BuilderError("n and m must be nonnegative")
        if self.kind in ("Brel", "BX", "Trel") and self.m < 1:
            raise BuilderError(f"{self.kind} needs m >= 1")
        if self.kind in ("T", "F", "coF") and self.n < 1:
            raise BuilderError(f"{self.kind} needs n >= 1")
        if self.estimate() > self.guard:
            raise GuardExceeded(f"{self.ring.size}^{self.n + self.m} vectors exceed guard {self.guard}")
        if self.kind in ("B", "Brel", "BX", "F", "coF") and self.facet_estimate() > FACET_GUARD:
            raise GuardExceeded(f"about {self.facet_estimate():.3g} top simplices exceed guard {FACET_GUARD}")

    def estimate(self) -> int:
        return self.ring.size ** (self.n + self.m)

    def facet_estimate(self) -> float:
        """``|R|^(n(n+m)) / n!``, an upper bound on unordered partial bases of length ``n``."""
        return float(self.ring.size) ** (self.n * (self.n + self.m)) / math.factorial(self.n)

    def build(self):
        self.validate()
        r, n, m = self.ring, self.n, self.m
        if self.kind in ("B", "Brel"):
            return build_basis_complex(r, n, m)
        if self.kind == "BX":
            return build_BX(r, n, m, self.gamma)
        if self.kind in ("T", "Trel"):
            return build_tits(r, n, m)
        if self.kind == "SE1":
            return build_splitting(r, n)
        if self.kind == "SE1rel":
            return build_splitting(r, n, V=self.V, W=self.W)
        return build_frames(r, n, coframe=self.kind == "coF")


# ---------------------------------------------------------------- helpers


def _unique_rows(rows: np.ndarray, base: int) -> np.ndarray:
    if len(rows) == 0:
        return rows
    rows = np.sort(rows, axis=1)
    k = rows.shape[1]
    if base ** k < 2 ** 62:
        w = base ** np.arange(k - 1, -1, -1, dtype=np.int64)
        _, idx = np.unique(rows @ w, return_index=True)
        return rows[idx]
    return np.unique(rows, axis=0)


def _subsets(top: np.ndarray, base: int) -> list[np.ndarray]:
    """Code arrays of all nonempty subsets of the rows of ``top``."""
    k = top.shape[1]
    out = []
    for size in range(1, k + 1):
        parts = [top[:, cols] for cols in itertools.combinations(range(k), size)]
        out.append(_unique_rows(np.concatenate(parts), base))
    return out


def _fixed_codes(ring: Ring, N: int, fixed: Sequence[Sequence[int]]) -> list[int]:
    fm = free_module(ring, N)
    return [fm.code(v) for v in fixed]


def _complex_from_codes(ring: Ring, N: int, arrays: list[np.ndarray], name: str,
                        meta: dict | None = None) -> SimplicialComplex:
    fm = free_module(ring, N)
    if not arrays or len(arrays[0]) == 0:
        return SimplicialComplex([], [], name, dict(meta or {}, ambient=N, codes=np.zeros(0, np.int64)))
    verts = np.unique(arrays[0][:, 0])
    simplices = [np.searchsorted(verts, a) for a in arrays]
    payloads = [fm.vector(int(c)) for c in verts]
    info = dict(meta or {})
    info.update(ambient=N, codes=verts, ring=ring.name)
    return SimplicialComplex(simplices, payloads, name, info)


# ---------------------------------------------------------------- basis complexes


def _b_simplices(ring: Ring, N: int, fixed: list[int]) -> list[np.ndarray]:
    """Partial bases extending ``fixed``: all subsets of full bases containing it."""
    fm = free_module(ring, N)
    size, q = fm.size, ring.size
    smul = fm.smul
    target = N - len(fixed)
    if target <= 0:
        return []
    everything = np.arange(size, dtype=np.int64)

    def span_with(span: np.ndarray, w: int) -> np.ndarray:
        return np.unique(fm.add(span[:, None], smul[:, w][None, :]).ravel())

    span0 = np.zeros(1, dtype=np.int64)
    for c in fixed:
        new = span_with(span0, c)
        if len(new) != len(span0) * q:
            raise BuilderError("fixed vectors are not linearly independent")
        span0 = new
    # lab[x] is a canonical label of the coset x + span
    lab0 = fm.add(everything[:, None], span0[None, :]).min(axis=1)

    def passing(lab: np.ndarray, cands: np.ndarray) -> np.ndarray:
        if len(cands) == 0:
            return cands
        vals = np.sort(lab[smul[:, cands]], axis=0)
        return cands[(vals[1:] != vals[:-1]).all(axis=0)]

    leaves: list[np.ndarray] = []

    def grow(prefix: list[int], lab: np.ndarray, cands: np.ndarray) -> None:
        ok = passing(lab, cands)
        if len(prefix) + 2 == target and len(ok) > 1:
            # children labels at once, then every pair (w, x) with w < x
            labs = lab[fm.add(everything[:, None, None], smul[:, ok][None, :, :])].min(axis=1)
            I, J = np.triu_indices(len(ok), 1)
            vals = np.sort(labs[smul[:, ok[J]], I], axis=0)
            good = (vals[1:] != vals[:-1]).all(axis=0)
            if good.any():
                pre = np.tile(np.array(prefix, dtype=np.int64), (int(good.sum()), 1))
                leaves.append(np.column_stack([pre, ok[I[good]], ok[J[good]]]))
            return
        if len(prefix) + 1 == target:
            if len(ok):
                leaves.append(np.column_stack([np.tile(np.array(prefix, dtype=np.int64), (len(ok), 1)), ok])
                              if prefix else ok[:, None])
            return
        for i, w in enumerate(ok.tolist()):
            child = lab[fm.add(everything[:, None], smul[:, w][None, :])].min(axis=1)
            grow(prefix + [w], child, ok[i + 1:])

    grow([], lab0, everything[1:])
    if not leaves:
        return []
    return _subsets(np.concatenate(leaves), size)


def _pairing_table(ring: Ring, N: int) -> np.ndarray:
    fm = free_module(ring, N)
    return fm.right_pairing(fm.coords, fm.coords)


def _u_simplices(ring: Ring, N: int, fixed: list[int], max_size: int | None = None) -> list[np.ndarray]:
    """Sets ``s`` with ``fixed + s`` a basis of a free summand (rows with a right inverse).

    Adding ``x`` to a set ``S`` keeps a right inverse iff some column pairs to
    zero on ``S`` and to one on ``x``, and for every ``l`` in ``S`` some column
    with pattern ``e_l`` on ``S`` pairs to zero with ``x``.
    """
    fm = free_module(ring, N)
    P = _pairing_table(ring, N)
    is0 = P == 0
    is1 = P == ring.one
    top = N - len(fixed) if max_size is None else max_size
    if top <= 0:
        return []

    def masks(S: list[int]) -> tuple[np.ndarray, list[np.ndarray]]:
        if not S:
            return np.ones(fm.size, dtype=bool), []
        nz = ~is0[S]
        single = nz.sum(axis=0) == 1
        return ~nz.any(axis=0), [single & is1[l] for l in S]

    zero_f, single_f = masks(fixed)
    cands = np.setdiff1d(np.arange(1, fm.size, dtype=np.int64), fixed)
    ok = is1[np.ix_(cands, np.nonzero(zero_f)[0])].any(axis=1)
    for col in single_f:
        ok &= is0[np.ix_(cands, np.nonzero(col)[0])].any(axis=1)
    verts = cands[ok]
    if len(verts) == 0:
        return []
    levels = [np.arange(len(verts), dtype=np.int64)[:, None]]

    def grid(S: list[int], ws: np.ndarray, xs: np.ndarray) -> np.ndarray:
        zero, single = masks(S)
        Zw, Ow = is0[ws], is1[ws]
        X0 = is0[xs].T.astype(np.float32)
        X1 = is1[xs].T.astype(np.float32)
        ok = (((Zw & zero).astype(np.float32) @ X1) > 0) & (((Ow & zero).astype(np.float32) @ X0) > 0)
        for col in single:
            ok &= ((Zw & col).astype(np.float32) @ X0) > 0
        return ok

    adj = None
    while len(levels) < top:
        cur = levels[-1]
        rows = []
        if cur.shape[1] == 1:
            ids = cur[:, 0]
            adj = np.zeros((len(verts), len(verts)), dtype=bool)
            for start in range(0, len(ids), 512):
                block = ids[start:start + 512]
                adj[block] = grid(fixed, verts[block], verts)
            adj &= adj.T
            i, j = np.nonzero(np.triu(adj, 1))
            if len(i):
                rows.append(np.column_stack([i, j]))
        else:
            prefixes = cur[:, :-1]
            change = np.nonzero((prefixes[1:] != prefixes[:-1]).any(axis=1))[0] + 1
            for lo, hi in zip(np.concatenate([[0], change]), np.concatenate([change, [len(cur)]])):
                prefix = cur[lo, :-1]
                ws = cur[lo:hi, -1]
                common = adj[prefix].all(axis=0)
                common[: ws.min() + 1] = False
                xs = np.nonzero(common)[0]
                if len(xs) == 0:
                    continue
                good = grid(fixed + [int(c) for c in verts[prefix]], verts[ws], verts[xs])
                good &= adj[np.ix_(ws, xs)] & (xs[None, :] > ws[:, None])
                wi, xi = np.nonzero(good)
                if len(wi):
                    rows.append(np.column_stack([np.repeat(prefix[None, :], len(wi), axis=0), ws[wi], xs[xi]]))
        if not rows:
            break
        levels.append(np.concatenate(rows))
    return [_unique_rows(verts[lv], fm.size) for lv in levels]


def _compare_levels(a: list[np.ndarray], b: list[np.ndarray]) -> tuple | None:
    """First simplex present in one family but not the other."""
    for k in range(max(len(a), len(b))):
        x = a[k] if k < len(a) else np.zeros((0, k + 1), np.int64)
        y = b[k] if k < len(b) else np.zeros((0, k + 1), np.int64)
        if x.shape == y.shape and np.array_equal(x, y):
            continue
        xs = {tuple(r) for r in x.tolist()}
        ys = {tuple(r) for r in y.tolist()}
        if xs != ys:
            diff = sorted(xs ^ ys)[0]
            return ("B" if diff in xs else "U", diff)
    return None


def basis_link_codes(ring: Ring, N: int, fixed: Sequence[Sequence[int]], method: str = "both") -> list[np.ndarray]:
    """Code arrays of ``Link_{B(R^N)}(fixed)``; ``method`` is ``B``, ``U`` or ``both`` (compared)."""
    fc = _fixed_codes(ring, N, fixed)
    if fixed and not is_partial_basis(ring, [tuple(v) for v in fixed], N):
        raise BuilderError("fixed vectors do not form a partial basis")
    if method == "U":
        return _u_simplices(ring, N, fc)
    b = _b_simplices(ring, N, fc)
    if method == "B":
        return b
    u = _u_simplices(ring, N, fc)
    diff = _compare_levels(b, u)
    if diff is not None:
        fm = free_module(ring, N)
        which, codes = diff
        vectors = tuple(fm.vector(c) for c in codes)
        raise EligibilityViolation(
            f"partial-basis and unimodular complexes differ over {ring.name}: "
            f"{vectors} only in the {which} complex", vectors)
    return b


def build_basis_complex(ring: Ring, n: int, m: int = 0, method: str = "both") -> SimplicialComplex:
    """``B_n(R)`` for ``m = 0``, else ``B_n^m(R)`` inside ``R^{m+n}``."""
    if n < 0 or m < 0:
        raise BuilderError("n and m must be nonnegative")
    N = n + m
    fixed = [unit_vector(ring, N, i) for i in range(m)]
    arrays = basis_link_codes(ring, N, fixed, method)
    name = f"B_{n}({ring.name})" if m == 0 else f"B_{n}^{m}({ring.name})"
    return _complex_from_codes(ring, N, arrays, name, {"kind": "B", "n": n, "m": m,
                                                       "eligible": eligible(ring)})


def basis_vertex_map(small: SimplicialComplex, big: SimplicialComplex, shift: int) -> np.ndarray:
    """Vertex ids in ``big`` of ``small``'s vectors padded with ``shift`` leading zeros."""
    pos = {v: i for i, v in enumerate(big.payloads)}
    try:
        return np.array([pos[tuple([0] * shift) + tuple(v)] for v in small.payloads], dtype=np.int64)
    except KeyError as exc:
        raise BuilderError(f"vector {exc} is not a vertex of {big.name}") from None


def same_vertex_map(small: SimplicialComplex, big: SimplicialComplex) -> np.ndarray:
    return basis_vertex_map(small, big, 0)


# ---------------------------------------------------------------- BX


def build_BX(ring: Ring, n: int, m: int, gamma: Sequence[Sequence[int]] = ()) -> SimplicialComplex:
    """Link of ``gamma`` in ``B_n^m`` with externally additive simplices glued on."""
    if m < 1:
        raise BuilderError("BX needs m >= 1")
    N = n + m
    gamma = [tuple(int(x) for x in v) for v in gamma]
    if any(len(v) != N for v in gamma):
        raise BuilderError(f"gamma vectors must lie in R^{N}")
    es = [unit_vector(ring, N, i) for i in range(m)]
    if gamma and (len(set(gamma)) != len(gamma) or set(gamma) & set(es)
                  or not is_partial_basis(ring, es + gamma, N)):
        raise BuilderError("gamma is not a simplex of B_n^m")
    fixed = es + gamma
    fm = free_module(ring, N)
    standard = basis_link_codes(ring, N, fixed, "B")
    fc = _fixed_codes(ring, N, fixed)
    smul = fm.smul
    shifts = np.array([smul[r, f] for f in fc for r in ring.nonzero()], dtype=np.int64)
    raw = 0
    external: dict[int, list[np.ndarray]] = {}
    for k, tau in enumerate(standard):
        if len(tau) == 0:
            continue
        for i in range(tau.shape[1]):
            base = tau[:, i]
            new = fm.add(base[:, None], shifts[None, :]).ravel()
            rows = np.column_stack([np.repeat(tau, len(shifts), axis=0), new])
            raw += len(rows)
            external.setdefault(k + 1, []).append(rows)
    arrays = []
    merged_ext = 0
    counts_ext = []
    for k in range(max(len(standard), max(external, default=-1) + 1)):
        parts = [standard[k]] if k < len(standard) else []
        ext = _unique_rows(np.concatenate(external[k]), fm.size) if k in external else None
        if ext is not None:
            merged_ext += sum(len(e) for e in external[k]) - len(ext)
            parts.append(ext)
        rows = _unique_rows(np.concatenate(parts), fm.size)
        counts_ext.append(len(rows) - (len(standard[k]) if k < len(standard) else 0))
        arrays.append(rows)
    name = f"BX_{n}^{m}({ring.name})" + (f"[gamma={len(gamma)}]" if gamma else "")
    meta = {"kind": "BX", "n": n, "m": m, "gamma": gamma, "external_counts": counts_ext,
            "coincidences_merged": merged_ext, "standard_counts": [len(s) for s in standard]}
    x = _complex_from_codes(ring, N, arrays, name, meta)
    return x


# ---------------------------------------------------------------- spans and summands


def _span_rows(ring: Ring, N: int, rows: np.ndarray) -> np.ndarray:
    """Sorted span codes for each row of generator codes (rows give free spans of equal size)."""
    fm = free_module(ring, N)
    smul = fm.smul
    span = np.zeros((len(rows), 1), dtype=np.int64)
    for i in range(rows.shape[1]):
        orbit = smul[:, rows[:, i]].T
        span = fm.add(span[:, :, None], orbit[:, None, :]).reshape(len(rows), -1)
    return np.sort(span, axis=1)


def _group_spans(ring: Ring, N: int, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct spans of generator rows: (span code table, witness rows, inverse index)."""
    spans = _span_rows(ring, N, rows)
    uniq, first, inv = np.unique(spans, axis=0, return_index=True, return_inverse=True)
    return uniq, rows[first], inv.ravel()


def _summand(ring: Ring, N: int, codes: np.ndarray, witness_codes: Sequence[int]) -> Submodule:
    fm = free_module(ring, N)
    s = Submodule(ring, N, frozenset(int(c) for c in codes))
    s.witness = tuple(fm.vector(int(c)) for c in witness_codes)
    s.free_rank = len(witness_codes)
    return s


def free_summands(ring: Ring, N: int, ranks: Iterable[int]) -> list[Submodule]:
    """All free summands of ``R^N`` of the given ranks, each with a basis witness."""
    ranks = sorted(set(ranks))
    out: list[Submodule] = []
    if 0 in ranks:
        out.append(_summand(ring, N, np.zeros(1, np.int64), ()))
    want = [k for k in ranks if 1 <= k <= N]
    if not want:
        return out
    levels = _u_simplices(ring, N, [], max_size=max(want))
    for k in want:
        if k - 1 >= len(levels):
            continue
        uniq, wit, _ = _group_spans(ring, N, levels[k - 1])
        out.extend(_summand(ring, N, u, w) for u, w in zip(uniq, wit))
    return out


def _inclusion_order(elements: Sequence[Submodule], size: int) -> np.ndarray:
    member = np.zeros((len(elements), size), dtype=np.int32)
    for i, e in enumerate(elements):
        member[i, list(e.codes)] = 1
    sizes = member.sum(axis=1)
    inter = member @ member.T
    return (inter == sizes[:, None]) & (sizes[:, None] < sizes[None, :])


def _sort_elements(elements: list[Submodule]) -> list[Submodule]:
    return sorted(elements, key=lambda s: (len(s.codes), s.key))


def _embed_table(ring: Ring, basis: Sequence[Sequence[int]], N: int) -> np.ndarray:
    """Codes in ``R^N`` of ``x . basis`` for every ``x`` in ``R^k``."""
    k = len(basis)
    fk = free_module(ring, k)
    return free_module(ring, N).encode(fk.times(basis))


def graph_complements(ring: Ring, n: int, m: int) -> list[tuple[tuple[int, ...], ...]]:
    """Bases ``[psi | I_n]`` of every complement of ``R^m`` in ``R^{m+n}``."""
    out = []
    for entries in itertools.product(range(ring.size), repeat=n * m):
        rows = []
        for i in range(n):
            psi = entries[i * m:(i + 1) * m]
            rows.append(tuple(psi) + unit_vector(ring, n, i))
        out.append(tuple(rows))
    return out


def build_tits(ring: Ring, n: int, m: int = 0) -> Poset:
    """``T_n(R)`` (proper nonzero free summands), or ``T_n^m(R)`` for ``m > 0``."""
    if n < 1:
        raise BuilderError("Tits poset needs n >= 1")
    if m == 0:
        elements = _sort_elements(free_summands(ring, n, range(1, n)))
        poset = Poset(elements, _inclusion_order(elements, ring.size ** n), f"T_{n}({ring.name})")
        poset.meta.update(kind="T", n=n, m=0, ambient=n, ring=ring.name)
        return poset
    N = n + m
    free_module(ring, N)
    inner = free_summands(ring, n, range(1, n + 1))
    seen: dict[bytes, Submodule] = {}
    for rows in graph_complements(ring, n, m):
        table = _embed_table(ring, rows, N)
        for s in inner:
            codes = np.sort(table[sorted(s.codes)])
            key = codes.tobytes()
            if key not in seen:
                wit = [tuple(int(x) for x in _vec_times(ring, w, rows)) for w in s.witness]
                sub = Submodule(ring, N, frozenset(int(c) for c in codes))
                sub.witness, sub.free_rank = tuple(wit), len(wit)
                seen[key] = sub
    elements = _sort_elements(list(seen.values()))
    poset = Poset(elements, _inclusion_order(elements, ring.size ** N), f"T_{n}^{m}({ring.name})")
    poset.meta.update(kind="Trel", n=n, m=m, ambient=N, ring=ring.name)
    return poset


def _vec_times(ring: Ring, v: Sequence[int], rows: Sequence[Sequence[int]]) -> tuple[int, ...]:
    out = [0] * len(rows[0])
    for a, row in zip(v, rows):
        for j, b in enumerate(row):
            out[j] = int(ring.add[out[j], ring.mul[a, b]])
    return tuple(out)


# ---------------------------------------------------------------- splittings


@dataclass(frozen=True)
class Splitting:
    P: Submodule
    Q: Submodule

    def __repr__(self) -> str:
        return f"Splitting(rank {self.P.free_rank}+{self.Q.free_rank})"


def _summands_of(ring: Ring, ambient: Submodule | None, N: int) -> list[Submodule]:
    """Nonzero proper free summands of ``ambient`` (all of ``R^N`` when ``None``)."""
    if ambient is None:
        return free_summands(ring, N, range(1, N))
    from .linalg import is_free_summand

    r = is_free_summand(ambient)
    if r is None:
        raise BuilderError("ambient module is not a free summand")
    table = _embed_table(ring, ambient.witness, N)
    out = []
    for s in free_summands(ring, r, range(1, r)):
        codes = np.sort(table[sorted(s.codes)])
        sub = Submodule(ring, N, frozenset(int(c) for c in codes))
        sub.witness = tuple(_vec_times(ring, w, ambient.witness) for w in s.witness)
        sub.free_rank = len(s.witness)
        out.append(sub)
    return out


def build_splitting(ring: Ring, n: int, V: Submodule | None = None, W: Submodule | None = None,
                    ambient: Submodule | None = None) -> Poset:
    """Pairs ``(P, Q)`` with ``P + Q`` a direct sum equal to the ambient module.

    ``(P, Q) <= (P', Q')`` iff ``P <= P'`` and ``Q' <= Q``; optional constraints
    keep ``P <= V`` and ``W <= Q``.
    """
    from .linalg import is_free_summand

    for name, s in (("V", V), ("W", W)):
        if s is not None and not s.is_zero() and is_free_summand(s) is None:
            raise BuilderError(f"{name} is not a free summand")
    total = ring.size ** n if ambient is None else len(ambient.codes)
    parts = _summands_of(ring, ambient, n)
    if not parts:
        poset = Poset([], np.zeros((0, 0), bool), f"SE1_{n}({ring.name})")
        poset.meta.update(kind="SE1", n=n)
        return poset
    size = ring.size ** n
    member = np.zeros((len(parts), size), dtype=np.int32)
    for i, e in enumerate(parts):
        member[i, list(e.codes)] = 1
    sizes = member.sum(axis=1)
    inter = member @ member.T
    ok = (inter == 1) & (sizes[:, None] * sizes[None, :] == total)
    if V is not None:
        vmask = np.zeros(size, dtype=np.int32)
        vmask[list(V.codes)] = 1
        ok &= (member @ vmask == sizes)[:, None]
    if W is not None:
        wmask = np.zeros(size, dtype=np.int32)
        wmask[list(W.codes)] = 1
        ok &= (member @ wmask == len(W.codes))[None, :]
    pi, qi = np.nonzero(ok)
    incl = (inter == sizes[:, None])
    elements = [Splitting(parts[a], parts[b]) for a, b in zip(pi.tolist(), qi.tolist())]
    le = incl[np.ix_(pi, pi)] & incl[np.ix_(qi, qi)].T
    less = le & ~np.eye(len(elements), dtype=bool)
    tag = "SE1rel" if (V is not None or W is not None) else "SE1"
    poset = Poset(elements, less, f"{tag}_{n}({ring.name})")
    poset.meta.update(kind=tag, n=n, ambient=n)
    return poset


# ---------------------------------------------------------------- frames


def build_frames(ring: Ring, n: int, coframe: bool = False) -> SimplicialComplex:
    """Complex of partial frames (lines) or partial co-frames (hyperplanes) of ``R^n``."""
    if n < 1:
        raise BuilderError("frames need n >= 1")
    fm = free_module(ring, n)
    fc: list[int] = []
    b = _b_simplices(ring, n, fc)
    if not b:
        return SimplicialComplex([], [], "coF" if coframe else "F")
    bases = b[-1] if len(b) == n else np.zeros((0, n), np.int64)
    if coframe and n > 1:
        faces = np.concatenate([np.delete(bases, i, axis=1) for i in range(n)])
        distinct, back = np.unique(faces, axis=0, return_inverse=True)
        uniq, wit, inv = _group_spans(ring, n, distinct)
        ids = inv[back.ravel()].reshape(n, len(bases)).T
    else:
        verts = b[0][:, 0]
        uniq, wit, inv = _group_spans(ring, n, verts[:, None])
        pos = np.searchsorted(verts, bases)
        ids = inv[pos]
        if coframe:  # n == 1: the only hyperplane is zero
            uniq = np.zeros((1, 1), np.int64)
            wit = np.zeros((1, 0), np.int64)
            ids = np.zeros((len(bases), 1), np.int64)
    arrays = _subsets(ids, len(uniq) + 1)
    payloads = [_summand(ring, n, u, w) for u, w in zip(uniq, wit)]
    used = np.unique(arrays[0][:, 0])
    arrays = [np.searchsorted(used, a) for a in arrays]
    payloads = [payloads[i] for i in used]
    name = ("coF_" if coframe else "F_") + f"{n}({ring.name})"
    x = SimplicialComplex(arrays, payloads, name, {"kind": "coF" if coframe else "F", "n": n, "ambient": n})
    del fm
    return x


# ---------------------------------------------------------------- maps


def _index_by_codes(items: Sequence) -> dict:
    out = {}
    for i, s in enumerate(items):
        key = (s.P.codes, s.Q.codes) if isinstance(s, Splitting) else s.codes
        out[key] = i
    return out


def span_map(ring: Ring, n: int, m: int = 0) -> PosetMap:
    """Span from the simplex poset of ``B_n`` (``(n-2)``-skeleton) or ``B_n^m`` to the Tits poset."""
    bx = build_basis_complex(ring, n, m, method="B")
    top = n - 2 if m == 0 else None
    src = simplex_poset(bx, top)
    tgt = build_tits(ring, n, m)
    N = n + m
    fm = free_module(ring, N)
    where = _index_by_codes(tgt.elements)
    assignment = []
    for simplex in src.elements:
        vecs = [bx.payloads[v] for v in simplex]
        codes = frozenset(int(c) for c in fm.span_codes(vecs))
        if codes not in where:
            raise BuilderError(f"span of {vecs} is not an element of {tgt.name}")
        assignment.append(where[codes])
    return PosetMap(src, tgt, np.array(assignment, dtype=np.int64))


def dual_tits_iso(ring: Ring, n: int, sample: Iterable[Sequence[Sequence[int]]] = ()) -> tuple[PosetMap, dict]:
    """``V -> V°`` from ``T_n(R)`` to ``T_n(R^op)`` with an equivariance report."""
    src = build_tits(ring, n)
    op = opposite(ring)
    tgt = build_tits(op, n)
    where = _index_by_codes(tgt.elements)
    assignment = []
    for v in src.elements:
        ann = annihilator_dual(v)
        if ann.codes not in where:
            raise BuilderError("annihilator is not a free summand of the dual")
        assignment.append(where[ann.codes])
    f = PosetMap(src, tgt, np.array(assignment, dtype=np.int64), reversing=True)
    checked, failures = 0, []
    fm_r = free_module(ring, n)
    fm_o = free_module(op, n)
    for phi in sample:
        psi = inverse_transpose(ring, phi)
        img_r = fm_r.encode(fm_r.times(phi))
        img_o = fm_o.encode(fm_o.times(psi))
        for i, v in enumerate(src.elements):
            moved = frozenset(int(c) for c in img_r[sorted(v.codes)])
            left = annihilator_dual(Submodule(ring, n, moved)).codes
            right = frozenset(int(c) for c in img_o[sorted(tgt.elements[assignment[i]].codes)])
            checked += 1
            if left != right:
                failures.append((phi, i))
    return f, {"isomorphism": f.is_isomorphism(), "equivariance_checks": checked, "failures": failures}


def frame_coframe_iso(ring: Ring, n: int) -> SimplicialMap:
    """``L -> L°`` from partial frames of ``R^n`` to partial co-frames of the dual."""
    src = build_frames(ring, n)
    tgt = build_frames(opposite(ring), n, coframe=True)
    where = _index_by_codes(tgt.payloads)
    vmap = []
    for L in src.payloads:
        ann = annihilator_dual(L).codes
        if ann not in where:
            raise BuilderError("annihilator of a frame line is not a co-frame hyperplane")
        vmap.append(where[ann])
    return SimplicialMap(src, tgt, np.array(vmap, dtype=np.int64))


def _sum_codes(ring: Ring, N: int, a: frozenset, b: frozenset) -> frozenset:
    fm = free_module(ring, N)
    aa = np.array(sorted(a), dtype=np.int64)
    bb = np.array(sorted(b), dtype=np.int64)
    return frozenset(int(c) for c in np.unique(fm.add(aa[:, None], bb[None, :])))


@dataclass
class IsoReport:
    forward: PosetMap
    backward: PosetMap | None
    round_trip: bool
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.forward.is_isomorphism() and self.round_trip
                and (self.backward is None or self.backward.is_isomorphism()))


def cutting_down_iso(V: Submodule, W: Submodule, C: Submodule, ring: Ring | None = None,
                     N: int | None = None) -> IsoReport:
    """``(U, T) -> (U, T ∩ C)`` between splittings of ``M = R^N`` and of ``C``, with inverse ``(U', T' + W)``."""
    ring = ring or V.ring
    N = N or V.n
    if len(V.codes & W.codes) != 1:
        raise BuilderError("V and W must intersect trivially")
    if len(V.codes) * len(W.codes) >= ring.size ** N:
        raise BuilderError("V + W must be a proper summand")
    if not V.codes <= C.codes or len(C.codes & W.codes) != 1 or len(C.codes) * len(W.codes) != ring.size ** N:
        raise BuilderError("C must be a complement of W containing V")
    src = build_splitting(ring, N, V=V, W=W)
    tgt = build_splitting(ring, N, V=V, ambient=C)
    where_t = _index_by_codes(tgt.elements)
    where_s = _index_by_codes(src.elements)
    fwd = []
    for s in src.elements:
        key = (s.P.codes, s.Q.codes & C.codes)
        if key not in where_t:
            raise BuilderError("cut-down splitting missing from the target poset")
        fwd.append(where_t[key])
    bwd = []
    for t in tgt.elements:
        key = (t.P.codes, _sum_codes(ring, N, t.Q.codes, W.codes))
        if key not in where_s:
            raise BuilderError("lifted splitting missing from the source poset")
        bwd.append(where_s[key])
    f = PosetMap(src, tgt, np.array(fwd, dtype=np.int64))
    g = PosetMap(tgt, src, np.array(bwd, dtype=np.int64))
    round_trip = bool(np.array_equal(np.array(bwd)[fwd], np.arange(len(src)))
                      and np.array_equal(np.array(fwd)[bwd], np.arange(len(tgt)))) if len(src) else len(tgt) == 0
    return IsoReport(f, g, round_trip, {"size": len(src)})


def dualizing_splitting_iso(V: Submodule, c: int | None = None) -> IsoReport:
    """``(U, T) -> (T°, U°)`` from splittings of ``R^c`` below ``V`` to splittings of the dual above ``V°``."""
    ring = V.ring
    c = c or V.n
    op = opposite(ring)
    src = build_splitting(ring, c, V=V)
    Vd = annihilator_dual(V)
    tgt = build_splitting(op, c, W=Vd)
    where = _index_by_codes(tgt.elements)
    fwd, ranks_ok = [], True
    for s in src.elements:
        tp, up = annihilator_dual(s.Q), annihilator_dual(s.P)
        key = (tp.codes, up.codes)
        if key not in where:
            raise BuilderError("dual splitting missing from the target poset")
        fwd.append(where[key])
        ranks_ok &= len(tp.codes) == len(s.P.codes)
    f = PosetMap(src, tgt, np.array(fwd, dtype=np.int64))
    where_s = _index_by_codes(src.elements)
    bwd = []
    for t in tgt.elements:
        key = (annihilator_dual(t.Q).codes, annihilator_dual(t.P).codes)
        bwd.append(where_s[key])
    g = PosetMap(tgt, src, np.array(bwd, dtype=np.int64))
    rt = bool(np.array_equal(np.array(bwd, dtype=np.int64)[f.assignment], np.arange(len(src)))) if len(src) else True
    return IsoReport(f, g, rt, {"size": len(src), "rank_bookkeeping": bool(ranks_ok)})


# ---------------------------------------------------------------- fiber isomorphisms


def _coordinate_table(ring: Ring, basis: Sequence[Sequence[int]], N: int) -> np.ndarray:
    """For each ``x`` in ``R^N``: code in ``R^k`` of its coordinates w.r.t. the partial basis
    (meaningful for ``x`` in the span)."""
    k = len(basis)
    full = extends_to_basis(ring, [tuple(v) for v in basis], N)
    if full is None:
        raise BuilderError("basis witness does not extend")
    inv = mat_inverse(ring, full)
    right = [row[:k] for row in inv]
    fm = free_module(ring, N)
    return free_module(ring, k).encode(fm.times(right))


def _complement_within(ring: Ring, sub_basis: Sequence[Sequence[int]], big_basis: Sequence[Sequence[int]],
                       N: int) -> list[tuple[int, ...]]:
    """Basis of a complement of ``span(sub_basis)`` inside ``span(big_basis)``."""
    k = len(big_basis)
    coords = _coordinate_table(ring, big_basis, N)
    fm_k = free_module(ring, k)
    fm = free_module(ring, N)
    sub_coords = [fm_k.vector(int(coords[fm.code(v)])) for v in sub_basis]
    ext = extends_to_basis(ring, sub_coords, k)
    if ext is None:
        raise BuilderError("no complement found")
    return [_vec_times(ring, w, big_basis) for w in ext[len(sub_coords):]]


def _fiber_check(source: Poset, model: Poset, mapper) -> dict:
    where = _index_by_codes(model.elements)
    assignment = []
    for e in source.elements:
        key = mapper(e)
        if key not in where:
            return {"ok": False, "reason": "image not in model", "element": repr(e)}
        assignment.append(where[key])
    try:
        f = PosetMap(source, model, np.array(assignment, dtype=np.int64))
    except Exception as exc:
        return {"ok": False, "reason": str(exc)}
    ok = f.is_isomorphism()
    return {"ok": ok, "size": len(source)} if ok else {"ok": False, "reason": "not bijective/order-iso"}


def verify_fiber_isos(ring: Ring, n: int, m: int = 0) -> dict:
    """Upper, lower and interval fibers of (relative) Tits posets against smaller Tits posets."""
    T = build_tits(ring, n, m)
    N = n + m
    models: dict[tuple[int, int], Poset] = {}

    def model(k: int, mm: int) -> Poset:
        if (k, mm) not in models:
            models[(k, mm)] = build_tits(ring, k, mm) if k >= 1 else Poset([], np.zeros((0, 0), bool))
        return models[(k, mm)]

    records, failures = [], []
    complements = graph_complements(ring, n, m) if m else None
    for i, V in enumerate(T.elements):
        r = V.free_rank
        # lower fiber: coordinates in the basis of V
        coords = _coordinate_table(ring, V.witness, N)
        res = _fiber_check(T.below(i), model(r, 0), lambda U: frozenset(int(c) for c in coords[sorted(U.codes)]))
        records.append(("lower", i, res))
        # upper fiber
        if m == 0:
            C = _complement_within(ring, V.witness, [unit_vector(ring, N, j) for j in range(N)], N)
            D_basis, mm = C, 0
        else:
            fm = free_module(ring, N)
            L = next(rows for rows in complements
                     if set(V.codes) <= set(int(c) for c in fm.span_codes(rows)))
            C = _complement_within(ring, V.witness, L, N)
            D_basis, mm = [unit_vector(ring, N, j) for j in range(m)] + C, m
        k = len(D_basis) - mm
        if D_basis:
            dcodes = frozenset(int(c) for c in free_module(ring, N).span_codes(D_basis))
            dcoords = _coordinate_table(ring, D_basis, N)
            mapper = (lambda U, dc=dcodes, t=dcoords: frozenset(int(c) for c in t[sorted(U.codes & dc)]))
            res = _fiber_check(T.above(i), model(k, mm), mapper)
        else:
            res = {"ok": len(T.above(i)) == 0, "size": 0}
        records.append(("upper", i, res))
        # intervals
        if m == 0:
            for j in np.nonzero(T.less[i])[0].tolist():
                V2 = T.elements[j]
                C2 = _complement_within(ring, V.witness, V2.witness, N)
                if not C2:
                    continue
                c2codes = frozenset(int(c) for c in free_module(ring, N).span_codes(C2))
                t2 = _coordinate_table(ring, C2, N)
                mapper = (lambda U, cc=c2codes, t=t2: frozenset(int(c) for c in t[sorted(U.codes & cc)]))
                res = _fiber_check(T.interval(i, j), model(len(C2), 0), mapper)
                records.append(("interval", (i, j), res))
    for kind, where, res in records:
        if not res["ok"]:
            failures.append({"kind": kind, "at": str(where), **res})
    return {"ok": not failures, "checked": len(records), "failures": failures[:5], "poset": T.name}


def gl_sample(ring: Ring, n: int, count: int = 12, seed: int = 0) -> list[tuple[tuple[int, ...], ...]]:
    """Deterministic products of elementary and diagonal matrices."""
    rng = np.random.default_rng(seed)
    units = sorted(ring.units())
    out = [identity(ring, n)]
    for _ in range(count - 1):
        m = [list(r) for r in identity(ring, n)]
        for _ in range(3):
            if n > 1 and rng.random() < 0.7:
                i, j = rng.choice(n, size=2, replace=False)
                r = int(rng.integers(ring.size))
                m[i] = [int(ring.add[a, ring.mul[r, b]]) for a, b in zip(m[i], m[j])]
            else:
                i = int(rng.integers(n))
                u = units[int(rng.integers(len(units)))]
                m[i] = [int(ring.mul[u, a]) for a in m[i]]
        out.append(tuple(tuple(r) for r in m))
    return out
