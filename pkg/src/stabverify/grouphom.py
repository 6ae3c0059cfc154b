"""Homology of small finite matrix groups via the normalized bar complex."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .groups import FiniteMatrixGroup, embed_block, enumerate_gl
from .homology import Z, ChainComplex, CoefficientDomain, HomologyResult, SparseIntMatrix, chain_homology
from .linalg import Matrix
from .rings import Ring

BAR_GUARD = 250_000
INTEGRAL_ORDER_LIMIT = 24
H2_ORDER_LIMIT = 60


class GroupHomologyError(ValueError):
    pass


class Infeasible(GroupHomologyError):
    """The requested computation exceeds a size guard."""


def _bar_size(order: int, degree: int) -> int:
    return (order - 1) ** degree if degree > 0 else 1


def check_feasible(g: FiniteMatrixGroup, coeff: CoefficientDomain, max_degree: int,
                   guard: int = BAR_GUARD) -> None:
    need = _bar_size(g.order, max_degree + 1)
    if need > guard:
        raise Infeasible(f"{g.name}: bar degree {max_degree + 1} has {need} cells, guard {guard}")
    if coeff.kind == "Z" and g.order > INTEGRAL_ORDER_LIMIT and max_degree + 1 > 2:
        raise Infeasible(f"{g.name}: integral bar homology limited to |G| <= {INTEGRAL_ORDER_LIMIT} above degree 1")


@dataclass
class BarComplex:
    """Normalized bar complex of ``g`` with trivial integer coefficients, degrees ``0..top``."""

    group: FiniteMatrixGroup
    top: int
    table: np.ndarray = field(repr=False, default=None)
    identity: int = 0
    nonidentity: np.ndarray = field(repr=False, default=None)

    def __post_init__(self) -> None:
        if self.table is None:
            self.table = self.group.multiplication_table()
        self.identity = self.group.index(self.group.identity)
        self.nonidentity = np.array([i for i in range(self.group.order) if i != self.identity], dtype=np.int64)
        self._pos = np.full(self.group.order, -1, dtype=np.int64)
        self._pos[self.nonidentity] = np.arange(len(self.nonidentity))

    @property
    def q(self) -> int:
        return len(self.nonidentity)

    def dim(self, k: int) -> int:
        return 0 if k < 0 or k > self.top else _bar_size(self.group.order, k)

    def cells(self, k: int) -> np.ndarray:
        """Group-element indices of every degree-``k`` cell, in code order."""
        if k == 0:
            return np.zeros((1, 0), dtype=np.int64)
        digits = np.indices((self.q,) * k).reshape(k, -1).T
        return self.nonidentity[digits]

    def code(self, elems: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Codes of element tuples and a mask of tuples that avoid the identity."""
        pos = self._pos[elems]
        ok = (pos >= 0).all(axis=1)
        code = np.zeros(len(elems), dtype=np.int64)
        for j in range(elems.shape[1]):
            code = code * self.q + np.where(pos[:, j] >= 0, pos[:, j], 0)
        return code, ok

    def boundary(self, k: int) -> SparseIntMatrix:
        if k <= 1 or k > self.top:
            return SparseIntMatrix.zeros(self.dim(k - 1), self.dim(k))
        cells = self.cells(k)
        cols = np.arange(len(cells), dtype=np.int64)
        rows_all, cols_all, vals_all = [], [], []
        faces = [cells[:, 1:]]
        for i in range(1, k):
            merged = self.table[cells[:, i - 1], cells[:, i]]
            faces.append(np.concatenate([cells[:, :i - 1], merged[:, None], cells[:, i + 1:]], axis=1))
        faces.append(cells[:, :-1])
        for i, face in enumerate(faces):
            code, ok = self.code(face)
            rows_all.append(code[ok])
            cols_all.append(cols[ok])
            vals_all.append(np.full(int(ok.sum()), -1 if i % 2 else 1, dtype=np.int64))
        return SparseIntMatrix((self.dim(k - 1), self.dim(k)), np.concatenate(rows_all),
                               np.concatenate(cols_all), np.concatenate(vals_all))

    def chain_complex(self) -> ChainComplex:
        dims = {k: self.dim(k) for k in range(self.top + 1)}
        return ChainComplex(dims, {k: self.boundary(k) for k in range(1, self.top + 1)})


def bar_homology(g: FiniteMatrixGroup, coeff: CoefficientDomain = Z, max_degree: int = 2,
                 guard: int = BAR_GUARD) -> dict[int, HomologyResult]:
    """``H_i(G; k)`` for ``i <= max_degree``."""
    check_feasible(g, coeff, max_degree, guard)
    bar = BarComplex(g, max_degree + 1)
    return chain_homology(bar.chain_complex(), coeff, range(max_degree + 1))


def _inclusion(h: FiniteMatrixGroup, g: FiniteMatrixGroup, embed: Callable[[Matrix], Matrix] | None) -> np.ndarray:
    out = np.empty(h.order, dtype=np.int64)
    for i, x in enumerate(h.elements):
        y = embed(x) if embed is not None else x
        if y not in g:
            raise GroupHomologyError("h is not a subgroup of g")
        out[i] = g.index(y)
    return out


def relative_chain_complex(g: FiniteMatrixGroup, h: FiniteMatrixGroup, top: int,
                           embed: Callable[[Matrix], Matrix] | None = None) -> ChainComplex:
    """Mapping cone of the bar chain map of ``h -> g``: ``d(a, b) = (da + f(b), -db)``."""
    inc = _inclusion(h, g, embed)
    bg, bh = BarComplex(g, top), BarComplex(h, top - 1)
    dims = {k: bg.dim(k) + bh.dim(k - 1) for k in range(top + 1)}
    d = {}
    for k in range(1, top + 1):
        dg = bg.boundary(k)
        gk1 = bg.dim(k - 1)
        rows, cols, vals = [dg.rows], [dg.cols], [dg.vals]
        if k - 1 <= bh.top and bh.dim(k - 1):
            cells = bh.cells(k - 1)
            code, _ = bg.code(inc[cells])
            rows.append(code)
            cols.append(bg.dim(k) + np.arange(len(cells), dtype=np.int64))
            vals.append(np.ones(len(cells), dtype=np.int64))
            dh = bh.boundary(k - 1)
            rows.append(dh.rows + gk1)
            cols.append(dh.cols + bg.dim(k))
            vals.append(-dh.vals)
        d[k] = SparseIntMatrix((dims[k - 1], dims[k]), np.concatenate(rows), np.concatenate(cols),
                               np.concatenate(vals))
    return ChainComplex(dims, d)


def relative_group_homology(g: FiniteMatrixGroup, h: FiniteMatrixGroup, coeff: CoefficientDomain = Z,
                            max_degree: int = 2, embed: Callable[[Matrix], Matrix] | None = None,
                            guard: int = BAR_GUARD) -> dict[int, HomologyResult]:
    """``H_i(G, H; k)`` for ``i <= max_degree`` from the mapping cone."""
    check_feasible(g, coeff, max_degree, guard)
    cc = relative_chain_complex(g, h, max_degree + 1, embed)
    return chain_homology(cc, coeff, range(max_degree + 1))


def trivial_group(ring: Ring, n: int) -> FiniteMatrixGroup:
    from .linalg import identity

    return FiniteMatrixGroup(ring, n, [identity(ring, n)], name="1")


# ---------------------------------------------------------------- stability tables


@dataclass
class StabilityCell:
    n: int
    i: int
    prev: HomologyResult | None
    cur: HomologyResult | None
    rel_i: HomologyResult | None
    rel_next: HomologyResult | None
    verdict: str

    def row(self, coeff: CoefficientDomain) -> dict:
        def fmt(h: HomologyResult | None) -> str:
            if h is None:
                return "NA"
            return str(h.rank) if coeff.kind in ("Q", "Fp") else str(h)

        return {"n": self.n, "i": self.i, "dim_prev": fmt(self.prev), "dim_cur": fmt(self.cur),
                "dim_rel_i": fmt(self.rel_i), "verdict": self.verdict}


@dataclass
class StabilityTable:
    ring: Ring
    coeff: CoefficientDomain
    cells: list[StabilityCell]

    @property
    def ok(self) -> bool:
        return not any(c.verdict == "violation" for c in self.cells)

    @property
    def admissible(self) -> bool:
        return _two_invertible(self.coeff)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["n", "i", "dim_prev", "dim_cur", "dim_rel_i", "verdict"], lineterminator="\n")
        w.writeheader()
        for c in self.cells:
            w.writerow(c.row(self.coeff))
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"ring": self.ring.name, "coeff": str(self.coeff), "ok": self.ok,
                "rows": [c.row(self.coeff) for c in self.cells]}


def _two_invertible(coeff: CoefficientDomain) -> bool:
    return coeff.kind in ("Q", "half") or (coeff.kind == "Fp" and coeff.modulus != 2)


def stability_table(ring: Ring, n_max: int, i_max: int, coeff: CoefficientDomain,
                    guard: int = BAR_GUARD, h2_order_limit: int = H2_ORDER_LIMIT) -> StabilityTable:
    """Compare ``H_i(GL_{n-1})``, ``H_i(GL_n)`` and the relative groups of ``GL_{n-1} <= GL_n``."""
    groups = {n: enumerate_gl(ring, n) for n in range(1, n_max + 1)}
    cells = []
    for n in range(1, n_max + 1):
        cur = groups[n]
        prev = groups[n - 1] if n > 1 else trivial_group(ring, 1)
        embed = (lambda a, n=n: embed_block(ring, a, n)) if n > 1 else None

        def feasible(deg: int, order: int) -> bool:
            if deg >= 2 and order > h2_order_limit:
                return False
            try:
                check_feasible(cur if order == cur.order else prev, coeff, deg, guard)
            except Infeasible:
                return False
            return True

        for i in range(i_max + 1):
            if not feasible(i, cur.order):
                cells.append(StabilityCell(n, i, None, None, None, None, "infeasible"))
                continue
            h_prev = bar_homology(prev, coeff, i, guard)[i]
            h_cur = bar_homology(cur, coeff, i, guard)[i]
            rel = relative_group_homology(cur, prev, coeff, i, embed, guard)[i]
            rel_next = None
            if feasible(i + 1, cur.order):
                rel_next = relative_group_homology(cur, prev, coeff, i + 1, embed, guard)[i + 1]
            if i > n - 1:
                verdict = "outside-range"
            elif rel.is_zero():
                verdict = "consistent"
            elif _two_invertible(coeff):
                verdict = "violation"
            else:
                verdict = "nonzero-without-2-inverted"
            cells.append(StabilityCell(n, i, h_prev, h_cur, rel, rel_next, verdict))
    return StabilityTable(ring, coeff, cells)
