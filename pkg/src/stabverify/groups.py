"""Finite matrix groups acting on the right of row vectors, and modules over them."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complexes import SimplicialComplex
from .homology import HomologyResult, SparseIntMatrix, eliminate, homology_basis
from .linalg import Matrix, Submodule, free_module, identity, mat_inverse, mat_mul, unit_vector
from .rings import Ring

FULL_SCAN_GUARD = 1_000_000
ORDER_GUARD = 200_000


class GroupError(ValueError):
    pass


@dataclass(eq=False)
class FiniteMatrixGroup:
    """Explicitly enumerated group of invertible ``n x n`` matrices."""

    ring: Ring
    n: int
    elements: list[Matrix]
    generators: list[Matrix] = field(default_factory=list)
    name: str = ""
    provenance: str = "full scan"
    _index: dict[Matrix, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.elements = [tuple(tuple(int(x) for x in r) for r in g) for g in self.elements]
        self._index = {g: i for i, g in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise GroupError("duplicate group elements")
        if not self.generators:
            self.generators = generating_set(self)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def identity(self) -> Matrix:
        return identity(self.ring, self.n)

    def index(self, g: Matrix) -> int:
        return self._index[tuple(tuple(int(x) for x in r) for r in g)]

    def __contains__(self, g: Matrix) -> bool:
        return tuple(tuple(int(x) for x in r) for r in g) in self._index

    def mul(self, a: Matrix, b: Matrix) -> Matrix:
        return mat_mul(self.ring, a, b)

    def inverse(self, a: Matrix) -> Matrix:
        return mat_inverse(self.ring, a)

    def multiplication_table(self) -> np.ndarray:
        return group_multiplication_table(self)

    def _basis_codes(self) -> np.ndarray:
        fm = free_module(self.ring, self.n)
        return np.array([fm.code(unit_vector(self.ring, self.n, k)) for k in range(self.n)], dtype=np.int64)

    def _codes(self) -> list[tuple[int, ...]]:
        fm = free_module(self.ring, self.n)
        return [tuple(fm.code(r) for r in g) for g in self.elements]

    def _perm_stack(self) -> np.ndarray:
        if not hasattr(self, "_perms"):
            fm = free_module(self.ring, self.n)
            self._perms = np.stack([fm.encode(fm.times(g)) for g in self.elements]) if self.elements \
                else np.zeros((0, fm.size), np.int64)
        return self._perms

    def code_action(self, g: Matrix) -> np.ndarray:
        """``out[c]`` is the code of ``vector(c) . g``."""
        fm = free_module(self.ring, self.n)
        return fm.encode(fm.times(g))

    def is_closed(self) -> bool:
        return all(self.mul(a, b) in self for a in self.generators for b in self.elements)

    def to_json(self) -> dict:
        return {"name": self.name, "ring": self.ring.name, "n": self.n, "order": self.order,
                "generators": len(self.generators), "provenance": self.provenance}


def _multiplication_codes(group: FiniteMatrixGroup) -> tuple[np.ndarray, dict]:
    return group._perm_stack(), {c: i for i, c in enumerate(group._codes())}


def group_multiplication_table(group: FiniteMatrixGroup) -> np.ndarray:
    """``table[i, j]`` is the index of ``g_i g_j`` (row vectors: ``x g_i g_j``)."""
    perms, lookup = _multiplication_codes(group)
    basis = group._basis_codes()
    out = np.empty((group.order, group.order), dtype=np.int64)
    for i in range(group.order):
        rows_i = perms[i][basis]               # codes of the rows of g_i
        prod = perms[:, rows_i]                # prod[j, k] = code of (row k of g_i) g_j
        out[i] = [lookup[tuple(r)] for r in prod.tolist()]
    return out


def closure(ring: Ring, n: int, generators: Sequence[Matrix], guard: int = ORDER_GUARD) -> list[Matrix]:
    """Subgroup generated by invertible matrices (breadth-first right multiplication)."""
    fm = free_module(ring, n)
    basis = np.array([fm.code(unit_vector(ring, n, k)) for k in range(n)], dtype=np.int64)
    gen_perm = [fm.encode(fm.times(g)) for g in generators]
    start = tuple(int(c) for c in basis)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for rows in frontier:
            arr = np.array(rows, dtype=np.int64)
            for p in gen_perm:
                img = tuple(int(c) for c in p[arr])
                if img not in seen:
                    seen.add(img)
                    nxt.append(img)
                    if len(seen) > guard:
                        raise GroupError(f"group order exceeds guard {guard}")
        frontier = nxt
    return sorted(tuple(fm.vector(c) for c in rows) for rows in seen)


def generating_set(group: FiniteMatrixGroup) -> list[Matrix]:
    """Greedy generating set in element order."""
    if group.order <= 1:
        return []
    gens: list[Matrix] = []
    have: set = {group.identity}
    for g in group.elements:
        if g in have:
            continue
        gens.append(g)
        have = set(closure(group.ring, group.n, gens, guard=max(group.order, 1)))
        if len(have) == group.order:
            break
    return gens


def _ordered_bases(ring: Ring, N: int, fixed_rows: Sequence[Sequence[int]]) -> list[Matrix]:
    """Every invertible matrix whose first rows are ``fixed_rows``: row-by-row scan with span pruning."""
    fm = free_module(ring, N)
    q = ring.size
    everything = np.arange(fm.size, dtype=np.int64)
    span = np.zeros(1, dtype=np.int64)
    for r in fixed_rows:
        new = np.unique(fm.add(span[:, None], fm.smul[:, fm.code(r)][None, :]).ravel())
        if len(new) != len(span) * q:
            raise GroupError("fixed rows are not independent")
        span = new
    out: list[Matrix] = []
    prefix = [tuple(int(x) for x in r) for r in fixed_rows]

    def grow(rows: list[tuple[int, ...]], span: np.ndarray) -> None:
        if len(rows) == N:
            out.append(tuple(rows))
            return
        lab = fm.add(everything[:, None], span[None, :]).min(axis=1)
        vals = np.sort(lab[fm.smul], axis=0)
        ok = np.nonzero((vals[1:] != vals[:-1]).all(axis=0))[0]
        for c in ok.tolist():
            new = np.unique(fm.add(span[:, None], fm.smul[:, c][None, :]).ravel())
            grow(rows + [fm.vector(c)], new)

    grow(prefix, span)
    return sorted(out)


def _standard_generators(ring: Ring, n: int) -> list[Matrix]:
    gens = []
    for i, j in itertools.permutations(range(n), 2):
        for r in ring.nonzero():
            m = [list(row) for row in identity(ring, n)]
            m[i][j] = r
            gens.append(tuple(tuple(row) for row in m))
    for u in sorted(ring.units()):
        m = [list(row) for row in identity(ring, n)]
        m[0][0] = u
        gens.append(tuple(tuple(row) for row in m))
    return sorted(set(gens))


def enumerate_gl(ring: Ring, n: int, mode: str = "auto", guard: int = FULL_SCAN_GUARD) -> FiniteMatrixGroup:
    """``GL_n(R)`` by exhaustive scan, or by closure of elementary and diagonal matrices."""
    feasible = ring.size ** (n * n) <= guard
    if mode == "full" and not feasible:
        raise GroupError(f"|R|^(n^2) = {ring.size ** (n * n)} exceeds the full-scan guard {guard}")
    name = f"GL_{n}({ring.name})"
    if mode == "full" or (mode == "auto" and feasible):
        elements = _ordered_bases(ring, n, [])
        return FiniteMatrixGroup(ring, n, elements, name=name, provenance="full scan")
    gens = _standard_generators(ring, n)
    elements = closure(ring, n, gens)
    provenance = "generator-closure, unverified against full scan"
    if feasible:
        full = _ordered_bases(ring, n, [])
        provenance = "generator-closure, verified against full scan"
        if len(full) != len(elements):
            raise GroupError("generator closure is smaller than the full group")
    return FiniteMatrixGroup(ring, n, elements, gens, name=name, provenance=provenance)


def gl_relative(ring: Ring, n: int, m: int) -> FiniteMatrixGroup:
    """``GL_n^m(R)``: invertible ``(m+n)``-matrices fixing ``e_1 .. e_m`` (first ``m`` rows)."""
    N = n + m
    fixed = [unit_vector(ring, N, i) for i in range(m)]
    return FiniteMatrixGroup(ring, N, _ordered_bases(ring, N, fixed), name=f"GL_{n}^{m}({ring.name})")


def gl_fixing(ring: Ring, n: int, vectors: Sequence[Sequence[int]]) -> FiniteMatrixGroup:
    """Invertible matrices fixing each given vector of ``R^n``."""
    return stabilizer_subgroup(enumerate_gl(ring, n), vectors)


def stabilizer_subgroup(g: FiniteMatrixGroup, fix: Sequence[Sequence[int]] = (),
                        preserve: Submodule | Sequence[Submodule] | None = None,
                        name: str | None = None) -> FiniteMatrixGroup:
    """Elements fixing every vector in ``fix`` and mapping each preserved submodule into itself."""
    fm = free_module(g.ring, g.n)
    fix_codes = [fm.code(v) for v in fix]
    if isinstance(preserve, Submodule):
        preserve = [preserve]
    keep = []
    for h in g.elements:
        img = g.code_action(h)
        if any(img[c] != c for c in fix_codes):
            continue
        if preserve and not all(set(img[sorted(s.codes)].tolist()) <= s.codes for s in preserve):
            continue
        keep.append(h)
    return FiniteMatrixGroup(g.ring, g.n, keep, name=name or f"stab({g.name})",
                             provenance=g.provenance + ", filtered")


def is_subgroup(h: FiniteMatrixGroup, g: FiniteMatrixGroup) -> bool:
    return h.n == g.n and all(x in g for x in h.elements) and h.identity in h \
        and all(h.mul(a, b) in h for a in h.generators for b in h.elements)


def embed_block(ring: Ring, g: Matrix, n: int) -> Matrix:
    """``diag(g, 1, .., 1)`` of size ``n``."""
    k = len(g)
    rows = [tuple(g[i]) + tuple([0] * (n - k)) for i in range(k)]
    rows += [unit_vector(ring, n, i) for i in range(k, n)]
    return tuple(rows)


# ---------------------------------------------------------------- actions on complexes


def payload_key(p) -> object:
    if isinstance(p, Submodule):
        return p.codes
    if hasattr(p, "P") and hasattr(p, "Q"):
        return (p.P.codes, p.Q.codes)
    return tuple(p)


def _move_payload(p, perm: np.ndarray, fm) -> object:
    if isinstance(p, Submodule):
        return frozenset(int(c) for c in perm[sorted(p.codes)])
    if hasattr(p, "P") and hasattr(p, "Q"):
        return (frozenset(int(c) for c in perm[sorted(p.P.codes)]),
                frozenset(int(c) for c in perm[sorted(p.Q.codes)]))
    return fm.vector(int(perm[fm.code(p)]))


def vertex_permutation(x: SimplicialComplex, g: Matrix, ring: Ring, ambient: int | None = None) -> np.ndarray:
    """``out[v]`` is the vertex carrying ``payload(v) . g``."""
    n = ambient if ambient is not None else len(g)
    fm = free_module(ring, n)
    perm = fm.encode(fm.times(g))
    where = {payload_key(p): i for i, p in enumerate(x.payloads)}
    out = np.empty(x.num_vertices, dtype=np.int64)
    for v, p in enumerate(x.payloads[:x.num_vertices]):
        key = _move_payload(p, perm, fm)
        if key not in where:
            raise GroupError("group element does not preserve the vertex set")
        out[v] = where[key]
    return out


def _permute_simplices(x: SimplicialComplex, k: int, perm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index and orientation sign of the image of every ``k``-simplex."""
    rows = perm[x.simplices[k]]
    order = np.argsort(rows, axis=1, kind="stable")
    sorted_rows = np.take_along_axis(rows, order, axis=1)
    idx = x.index_of(k, sorted_rows)
    if (idx < 0).any():
        raise GroupError("vertex permutation is not simplicial")
    sign = _perm_signs(order)
    return idx, sign


def _perm_signs(order: np.ndarray) -> np.ndarray:
    k = order.shape[1]
    inv = np.zeros(len(order), dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            inv += order[:, i] > order[:, j]
    return np.where(inv % 2 == 0, 1, -1)


def is_simplicial_action(x: SimplicialComplex, perm: np.ndarray) -> bool:
    try:
        for k in range(x.dim + 1):
            _permute_simplices(x, k, perm)
    except GroupError:
        return False
    return True


@dataclass
class GModule:
    """Finitely generated abelian group ``Z^rank / relations`` with a right action.

    ``action[i]`` is an integer matrix whose row ``j`` gives the coordinates of
    ``z_j . g_i`` for the ``i``-th acting element ``g_i``.
    """

    rank: int
    relations: list[dict[int, int]]
    action: list[list[list[int]]]
    elements: list[Matrix] = field(default_factory=list)
    group: FiniteMatrixGroup | None = None
    basis: object = None
    complex: SimplicialComplex | None = None
    degree: int | None = None

    def matrix(self, g: Matrix) -> list[list[int]]:
        """Action matrix of an arbitrary group element (computed from the complex)."""
        if g in self.elements:
            return self.action[self.elements.index(g)]
        if self.complex is None or self.group is None:
            raise GroupError("element is not among the stored acting elements")
        return _action_matrix(self.complex, self.basis, self.degree, g, self.group.ring, self.group.n)

    def to_json(self) -> dict:
        return {"rank": self.rank, "relations": len(self.relations), "acting_elements": len(self.action)}


def _action_matrix(x: SimplicialComplex, basis, d: int, g: Matrix, ring: Ring, n: int) -> list[list[int]]:
    perm = vertex_permutation(x, g, ring, n)
    idx, sign = _permute_simplices(x, d, perm)
    rows = []
    for i in range(basis.rank):
        z = basis.generator(i)
        moved: dict[int, int] = {}
        for c, v in z.items():
            t = int(idx[c])
            moved[t] = moved.get(t, 0) + v * int(sign[c])
        coords = basis.coordinates({k: v for k, v in moved.items() if v})
        row = [0] * basis.rank
        for j, v in coords.items():
            row[j] = v
        rows.append(row)
    return rows


def action_on_homology(g: FiniteMatrixGroup, x: SimplicialComplex, d: int,
                       acting: Sequence[Matrix] | None = None) -> GModule:
    """Right action of ``g`` on ``H~_d(x)`` through its action on vertex payloads."""
    basis = homology_basis(x, d)
    elements = list(acting) if acting is not None else list(g.generators)
    action = [_action_matrix(x, basis, d, h, g.ring, g.n) for h in elements]
    rel = list(basis.relations)
    return GModule(basis.rank, rel, action, elements, g, basis, x, d)


def mat_compose(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> list[list[int]]:
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def coinvariants(m: GModule) -> HomologyResult:
    """``M / span{z.g - z}`` over the stored acting elements, computed integrally."""
    columns: list[dict[int, int]] = [dict(r) for r in m.relations if r]
    for A in m.action:
        for i, row in enumerate(A):
            col = {j: v for j, v in enumerate(row) if v}
            col[i] = col.get(i, 0) - 1
            col = {j: v for j, v in col.items() if v}
            if col:
                columns.append(col)
    if not columns or m.rank == 0:
        return HomologyResult(m.rank)
    e = eliminate(SparseIntMatrix.from_columns(m.rank, columns))
    return HomologyResult(m.rank - e.rank, tuple(e.divisors))


# ---------------------------------------------------------------- abelianization


def abelianization(g: FiniteMatrixGroup) -> HomologyResult:
    """``G / [G, G]`` as invariant factors, from coset exponents over a generating set."""
    if g.order == 1:
        return HomologyResult(0)
    table = g.multiplication_table()
    inv = np.empty(g.order, dtype=np.int64)
    e = g.index(g.identity)
    for i in range(g.order):
        inv[i] = int(np.nonzero(table[i] == e)[0][0])
    comm = {int(table[table[a, b], table[inv[a], inv[b]]]) for a in range(g.order) for b in range(g.order)}
    sub = {e}
    frontier = list(sub)
    gens = sorted(comm)
    while frontier:
        nxt = []
        for a in frontier:
            for c in gens:
                p = int(table[a, c])
                if p not in sub:
                    sub.add(p)
                    nxt.append(p)
        frontier = nxt
    subl = np.array(sorted(sub), dtype=np.int64)
    label = table[:, subl].min(axis=1)
    gen_idx = [g.index(h) for h in g.generators]
    k = len(gen_idx)
    reps = {int(label[e]): (e, (0,) * k)}
    frontier = [int(label[e])]
    relations: list[dict[int, int]] = []
    while frontier:
        nxt = []
        for lab in frontier:
            elem, vec = reps[lab]
            for i, gi in enumerate(gen_idx):
                new_elem = int(table[elem, gi])
                new_lab = int(label[new_elem])
                new_vec = tuple(v + (1 if j == i else 0) for j, v in enumerate(vec))
                if new_lab not in reps:
                    reps[new_lab] = (new_elem, new_vec)
                    nxt.append(new_lab)
                else:
                    old = reps[new_lab][1]
                    rel = {j: a - b for j, (a, b) in enumerate(zip(new_vec, old)) if a != b}
                    if rel:
                        relations.append(rel)
        frontier = nxt
    if not relations:
        return HomologyResult(k)
    el = eliminate(SparseIntMatrix.from_columns(k, relations))
    out = HomologyResult(k - el.rank, tuple(el.divisors))
    if out.rank or math.prod(out.torsion) != g.order // len(sub):
        raise GroupError("abelianization order mismatch")
    return out
