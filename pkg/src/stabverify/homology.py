"""Exact homology of simplicial complexes and chain complexes.

Boundary matrices are reduced by sparse elimination with unit pivots.  A
first pass takes only fill-free pivots (columns with a single live entry);
a Markowitz-style pass with fill follows; whatever is left without unit
entries goes to a dense Smith normal form over Python integers.  Every
operation is unimodular, so ranks and elementary divisors are exact.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .complexes import SimplicialComplex, links_of_all


class HomologyError(ValueError):
    pass


# ---------------------------------------------------------------- data types


@dataclass
class SparseIntMatrix:
    """Integer matrix as coordinate triples; duplicates summed, zeros dropped."""

    shape: tuple[int, int]
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        vals = np.asarray(self.vals)
        if vals.dtype != object:
            vals = vals.astype(np.int64)
        if len(rows):
            if rows.min() < 0 or rows.max() >= self.shape[0] or cols.min() < 0 or cols.max() >= self.shape[1]:
                raise HomologyError("entry index out of range")
            key = rows * max(self.shape[1], 1) + cols
            order = np.argsort(key, kind="stable")
            key, rows, cols, vals = key[order], rows[order], cols[order], vals[order]
            starts = np.concatenate([[True], key[1:] != key[:-1]])
            if not starts.all():
                idx = np.nonzero(starts)[0]
                vals = np.add.reduceat(vals, idx) if vals.dtype != object else \
                    np.array([sum(vals[a:b]) for a, b in zip(idx, list(idx[1:]) + [len(vals)])], dtype=object)
                rows, cols = rows[idx], cols[idx]
            nz = vals != 0
            rows, cols, vals = rows[nz], cols[nz], vals[nz]
        self.rows, self.cols, self.vals = rows, cols, vals

    @classmethod
    def from_dense(cls, m: Sequence[Sequence[int]]) -> "SparseIntMatrix":
        m = [list(r) for r in m]
        nr = len(m)
        nc = len(m[0]) if nr else 0
        entries = [(i, j, int(x)) for i, r in enumerate(m) for j, x in enumerate(r) if x]
        big = any(abs(x) >= 2 ** 62 for _, _, x in entries)
        return cls((nr, nc), np.array([e[0] for e in entries], dtype=np.int64),
                   np.array([e[1] for e in entries], dtype=np.int64),
                   np.array([e[2] for e in entries], dtype=object if big else np.int64))

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[dict[int, int]]) -> "SparseIntMatrix":
        r, c, v = [], [], []
        for j, col in enumerate(columns):
            for i, x in col.items():
                if x:
                    r.append(i)
                    c.append(j)
                    v.append(int(x))
        big = any(abs(x) >= 2 ** 62 for x in v)
        return cls((nrows, len(columns)), np.array(r, dtype=np.int64), np.array(c, dtype=np.int64),
                   np.array(v, dtype=object if big else np.int64))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseIntMatrix":
        e = np.zeros(0, dtype=np.int64)
        return cls((nrows, ncols), e, e, e)

    @property
    def nnz(self) -> int:
        return len(self.vals)

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.shape[1] for _ in range(self.shape[0])]
        for i, j, x in zip(self.rows.tolist(), self.cols.tolist(), self.vals.tolist()):
            out[i][j] = int(x)
        return out

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.vals.astype(np.int64), (self.rows, self.cols)), shape=self.shape)

    def transpose(self) -> "SparseIntMatrix":
        return SparseIntMatrix((self.shape[1], self.shape[0]), self.cols, self.rows, self.vals)

    def restrict(self, keep_rows: np.ndarray | None, keep_cols: np.ndarray | None) -> "SparseIntMatrix":
        """Submatrix on the given (sorted) row and column index sets."""
        rows, cols, vals = self.rows, self.cols, self.vals
        nr, nc = self.shape
        mask = np.ones(len(rows), dtype=bool)
        if keep_rows is not None:
            rmap = np.full(nr, -1, dtype=np.int64)
            rmap[keep_rows] = np.arange(len(keep_rows))
            rows = rmap[rows]
            mask &= rows >= 0
            nr = len(keep_rows)
        if keep_cols is not None:
            cmap = np.full(nc, -1, dtype=np.int64)
            cmap[keep_cols] = np.arange(len(keep_cols))
            cols = cmap[cols]
            mask &= cols >= 0
            nc = len(keep_cols)
        return SparseIntMatrix((nr, nc), rows[mask], cols[mask], vals[mask])

    def is_zero(self) -> bool:
        return self.nnz == 0


@dataclass(frozen=True)
class CoefficientDomain:
    """``Z``, ``Q``, ``Fp:<p>`` or ``half`` (integers with 2 inverted)."""

    kind: str
    p: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("Z", "Q", "Fp", "half"):
            raise HomologyError(f"unknown coefficient domain {self.kind!r}")
        if self.kind == "Fp":
            if self.p is None or self.p < 2 or any(self.p % d == 0 for d in range(2, math.isqrt(self.p) + 1)):
                raise HomologyError(f"Fp needs a prime, got {self.p}")

    @classmethod
    def parse(cls, text: str) -> "CoefficientDomain":
        t = text.strip()
        if t in ("Z", "Q", "half"):
            return cls(t)
        if t.startswith("Fp:") or t.startswith("F_"):
            return cls("Fp", int(t.split(":")[-1].split("_")[-1]))
        raise HomologyError(f"unknown coefficient domain {text!r}")

    @property
    def modulus(self) -> int | None:
        return self.p if self.kind == "Fp" else None

    def __str__(self) -> str:
        return f"Fp:{self.p}" if self.kind == "Fp" else self.kind


Z = CoefficientDomain("Z")
Q = CoefficientDomain("Q")
HALF = CoefficientDomain("half")


def Fp(p: int) -> CoefficientDomain:
    return CoefficientDomain("Fp", p)


@dataclass(frozen=True)
class HomologyResult:
    """Free rank plus elementary divisors (all > 1) of a finitely generated abelian group."""

    rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        t = tuple(int(d) for d in self.torsion if abs(int(d)) > 1)
        object.__setattr__(self, "torsion", tuple(sorted(abs(d) for d in t)))

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def to_json(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion)}

    def specialize(self, d: CoefficientDomain) -> "HomologyResult":
        """Drop torsion as appropriate for tensoring an integral result (degree-local view)."""
        if d.kind == "Z":
            return self
        if d.kind == "Q":
            return HomologyResult(self.rank)
        if d.kind == "half":
            return HomologyResult(self.rank, tuple(_odd_part(t) for t in self.torsion))
        return HomologyResult(self.rank + sum(1 for t in self.torsion if t % d.p == 0))

    def __str__(self) -> str:
        parts = ([f"Z^{self.rank}"] if self.rank else []) + [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def _odd_part(t: int) -> int:
    while t % 2 == 0:
        t //= 2
    return t


def invert_two_vanishes(h: HomologyResult) -> bool:
    return h.rank == 0 and all(_odd_part(t) == 1 for t in h.torsion)


# ---------------------------------------------------------------- dense SNF


def _dense_snf(a: list[list[int]], with_transforms: bool = False):
    m = len(a)
    n = len(a[0]) if m else 0
    A = [list(map(int, r)) for r in a]
    U = [[int(i == j) for j in range(m)] for i in range(m)] if with_transforms else None
    V = [[int(i == j) for j in range(n)] for i in range(n)] if with_transforms else None

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        if V is not None:
            for r in V:
                r[i], r[j] = r[j], r[i]

    def add_row(dst, src, f):  # row dst += f * row src
        A[dst] = [x + f * y for x, y in zip(A[dst], A[src])]
        if U is not None:
            U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):
        for r in A:
            r[dst] += f * r[src]
        if V is not None:
            for r in V:
                r[dst] += f * r[src]

    def smallest(cells):
        return min(((abs(A[i][j]), i, j) for i, j in cells if A[i][j]), default=None)

    t = 0
    while t < min(m, n):
        pick = smallest((i, j) for i in range(t, m) for j in range(t, n))
        if pick is None:
            break
        swap_rows(t, pick[1])
        swap_cols(t, pick[2])
        while True:
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
            pick = smallest([(i, t) for i in range(t + 1, m)] + [(t, j) for j in range(t + 1, n)])
            if pick is not None:
                swap_rows(t, pick[1])
                swap_cols(t, pick[2])
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            if U is not None:
                U[t] = [-x for x in U[t]]
        t += 1
    divisors = tuple(A[i][i] for i in range(min(m, n)) if A[i][i])
    return divisors, U, V


def smith_normal_form(m: SparseIntMatrix | Sequence[Sequence[int]], with_transforms: bool = False):
    """Nonzero invariant factors (with ``U, V`` such that ``U m V`` is diagonal on request)."""
    if not isinstance(m, SparseIntMatrix):
        m = SparseIntMatrix.from_dense(m)
    if with_transforms:
        divisors, U, V = _dense_snf(m.to_dense(), True)
        return divisors, U, V
    e = eliminate(m)
    return tuple([1] * (e.rank - len(e.divisors)) + sorted(e.divisors)), None, None


def determinantal_divisors(a: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Invariant factors from gcds of ``k x k`` minors (independent oracle)."""
    import itertools

    m = len(a)
    n = len(a[0]) if m else 0
    d_prev, out = 1, []
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, _bareiss_det([[a[i][j] for j in cols] for i in rows]))
                if g == 1 and d_prev == 1:
                    break
            if g == 1 and d_prev == 1:
                break
        if g == 0:
            break
        out.append(g // d_prev)
        d_prev = g
    return tuple(out)


def _bareiss_det(m: list[list[int]]) -> int:
    n = len(m)
    a = [r[:] for r in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


# ---------------------------------------------------------------- sparse elimination


@dataclass
class Elimination:
    rank: int
    divisors: list[int]            # invariant factors > 1 (integral runs)
    pivot_cols: np.ndarray
    clean: bool                    # every pivot a fill-tracked unit: row deletion downstream is valid
    kernel: dict[int, dict[int, int]] | None = None   # free column -> kernel vector
    kernel_extra: list[dict[int, int]] = field(default_factory=list)


def eliminate(m: SparseIntMatrix, modulus: int | None = None, skip_rows: np.ndarray | None = None,
              track_kernel: bool = False) -> Elimination:
    """Rank and invariant factors of ``m`` (over Z, or over F_p when ``modulus`` is set).

    ``skip_rows`` deletes rows before elimination; callers use it only when
    the deleted rows are pivot columns of a clean elimination of the previous
    boundary map, which leaves the invariant factors unchanged.
    """
    nrows, ncols = m.shape
    rows, cols, vals = m.rows, m.cols, m.vals
    if modulus is not None:
        vals = np.array([int(v) % modulus for v in vals.tolist()], dtype=np.int64) if vals.dtype == object \
            else vals % modulus
        nz = vals != 0
        rows, cols, vals = rows[nz], cols[nz], vals[nz]
    live = np.ones(nrows, dtype=np.uint8)
    if skip_rows is not None and len(skip_rows):
        live[np.asarray(skip_rows, dtype=np.int64)] = 0
        keep = live[rows].astype(bool)
        rows, cols, vals = rows[keep], cols[keep], vals[keep]

    order = np.lexsort((rows, cols))
    rc, vc = rows[order], vals[order]
    cptr = np.searchsorted(cols[order], np.arange(ncols + 1))
    order = np.lexsort((cols, rows))
    cr, vr = cols[order], vals[order]
    rptr = np.searchsorted(rows[order], np.arange(nrows + 1))

    small = vals.dtype != object
    rc_m, cr_m = memoryview(rc), memoryview(cr)
    vc_m = memoryview(vc) if small else vc.tolist()
    vr_m = memoryview(vr) if small else vr.tolist()
    cptr_m, rptr_m = memoryview(cptr), memoryview(rptr)
    count = np.diff(cptr).tolist()
    row_alive = bytearray(live.tobytes())
    used = bytearray(ncols)
    pivots: list[int] = []
    comb: dict[int, dict[int, int]] = {}

    def combination(c: int) -> dict[int, int]:
        got = comb.get(c)
        if got is None:
            got = comb[c] = {c: 1}
        return got

    def is_unit(v: int) -> bool:
        return v == 1 or v == -1 if modulus is None else v % modulus != 0

    def inverse(v: int) -> int:
        return v if modulus is None else pow(int(v), -1, modulus)

    def axpy(dst: dict[int, int], f: int, src: dict[int, int]) -> None:
        for k, x in src.items():
            y = dst.get(k, 0) - f * x
            if modulus is not None:
                y %= modulus
            if y:
                dst[k] = y
            else:
                dst.pop(k, None)

    # phase A: fill-free pivots ------------------------------------------
    queue = [int(c) for c in np.nonzero(np.diff(cptr) == 1)[0]]
    while queue:
        c = queue.pop()
        if used[c] or count[c] != 1:
            continue
        for q in range(cptr_m[c], cptr_m[c + 1]):
            r = rc_m[q]
            if row_alive[r]:
                break
        v = vc_m[q]
        if not is_unit(v):
            continue
        row_alive[r] = 0
        used[c] = 1
        pivots.append(c)
        if track_kernel:
            inv = inverse(v)
            src = combination(c)
        for q in range(rptr_m[r], rptr_m[r + 1]):
            c2 = cr_m[q]
            if not used[c2]:
                k = count[c2] - 1
                count[c2] = k
                if k == 1:
                    queue.append(c2)
                if track_kernel:
                    f = vr_m[q] * inv
                    axpy(combination(c2), f % modulus if modulus else f, src)

    # phase B: Markowitz pivots with fill --------------------------------
    alive_np = np.frombuffer(row_alive, dtype=np.uint8).astype(bool)
    used_np = np.frombuffer(used, dtype=np.uint8).astype(bool)
    colof = np.repeat(np.arange(ncols), np.diff(cptr))
    sel = alive_np[rc] & ~used_np[colof]
    columns: dict[int, dict[int, int]] = {}
    rowsets: dict[int, set[int]] = {}
    for c, r, v in zip(colof[sel].tolist(), rc[sel].tolist(), vc[sel].tolist()):
        columns.setdefault(c, {})[r] = int(v)
        rowsets.setdefault(r, set()).add(c)
    heap = [(len(col), c) for c, col in columns.items()]
    heapq.heapify(heap)
    deferred: set[int] = set()
    while heap:
        size, c = heapq.heappop(heap)
        col = columns.get(c)
        if col is None or len(col) != size:
            continue
        best = None
        for r, v in col.items():
            if is_unit(v) and (best is None or len(rowsets[r]) < len(rowsets[best])):
                best = r
        if best is None:
            deferred.add(c)
            continue
        deferred.discard(c)
        r = best
        inv = inverse(col[r])
        for c2 in list(rowsets[r]):
            if c2 == c:
                continue
            col2 = columns[c2]
            f = col2[r] * inv
            if modulus is not None:
                f %= modulus
            for r2, x in col.items():
                y = col2.get(r2, 0) - f * x
                if modulus is not None:
                    y %= modulus
                if y:
                    if r2 not in col2:
                        rowsets[r2].add(c2)
                    col2[r2] = y
                else:
                    if r2 in col2:
                        del col2[r2]
                        rowsets[r2].discard(c2)
            if track_kernel:
                axpy(combination(c2), f, combination(c))
            if col2:
                heapq.heappush(heap, (len(col2), c2))
            else:
                del columns[c2]
                deferred.discard(c2)
        for r2 in col:
            rowsets[r2].discard(c)
        del columns[c]
        rowsets.pop(r, None)
        pivots.append(c)

    # phase C: dense remainder without unit entries ----------------------
    divisors: list[int] = []
    clean = True
    extra: list[dict[int, int]] = []
    rank = len(pivots)
    remaining = sorted(columns)
    if remaining:
        clean = False
        if modulus is not None:
            raise HomologyError("internal: non-unit remainder over a field")
        rset = sorted({r for c in remaining for r in columns[c]})
        ridx = {r: i for i, r in enumerate(rset)}
        block = [[0] * len(remaining) for _ in rset]
        for j, c in enumerate(remaining):
            for r, v in columns[c].items():
                block[ridx[r]][j] = v
        d, _, _ = _dense_snf(block)
        rank += len(d)
        divisors = [x for x in d if x > 1]
        if track_kernel:
            for vec in _dense_column_kernel(block):
                kv: dict[int, int] = {}
                for j, coef in enumerate(vec):
                    if coef:
                        axpy(kv, -coef, combination(remaining[j]))
                extra.append(kv)

    kernel = None
    if track_kernel:
        pivot_set = set(pivots) | set(remaining)
        kernel = {c: combination(c) for c in range(ncols) if c not in pivot_set}
    return Elimination(rank, divisors, np.array(sorted(pivots), dtype=np.int64), clean, kernel, extra)


def _dense_column_kernel(block: list[list[int]]) -> list[list[int]]:
    """Z-basis of the integer kernel of a dense matrix, by column reduction."""
    m = len(block)
    n = len(block[0]) if m else 0
    cols = [[block[i][j] for i in range(m)] + [int(k == j) for k in range(n)] for j in range(n)]
    lead = 0
    for i in range(m):
        live = [j for j in range(lead, n) if cols[j][i]]
        while len(live) > 1:
            live.sort(key=lambda j: abs(cols[j][i]))
            p = live[0]
            for j in live[1:]:
                q = cols[j][i] // cols[p][i]
                cols[j] = [x - q * y for x, y in zip(cols[j], cols[p])]
            live = [j for j in live if cols[j][i]]
        if live:
            p = live[0]
            cols[lead], cols[p] = cols[p], cols[lead]
            lead += 1
    return [c[m:] for c in cols[lead:]]


# ---------------------------------------------------------------- chain complexes


def boundary_matrix(x: SimplicialComplex, k: int) -> SparseIntMatrix:
    """``d_k : C_k -> C_{k-1}``; ``k = 0`` is the augmentation."""
    if k == 0:
        n = x.count(0)
        return SparseIntMatrix((1, n), np.zeros(n, dtype=np.int64), np.arange(n), np.ones(n, dtype=np.int64))
    if k > x.dim or k < 0:
        return SparseIntMatrix.zeros(x.count(k - 1) if k - 1 <= x.dim else 0, x.count(k) if k <= x.dim else 0)
    s = x.simplices[k]
    n = len(s)
    rows, cols, vals = [], [], []
    for i in range(k + 1):
        idx = x.index_of(k - 1, np.delete(s, i, axis=1))
        if (idx < 0).any():
            raise HomologyError("complex is not downward closed")
        rows.append(idx)
        cols.append(np.arange(n))
        vals.append(np.full(n, -1 if i % 2 else 1, dtype=np.int64))
    return SparseIntMatrix((x.count(k - 1), n), np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


@dataclass
class ChainComplex:
    """Chain groups of the given ranks in degrees ``lo..hi`` with ``d[k] : C_k -> C_{k-1}``."""

    dims: dict[int, int]
    d: dict[int, SparseIntMatrix]

    def __post_init__(self) -> None:
        for k, D in self.d.items():
            if D.shape != (self.dims.get(k - 1, 0), self.dims.get(k, 0)):
                raise HomologyError(f"boundary {k} has shape {D.shape}")

    def boundary(self, k: int) -> SparseIntMatrix:
        if k in self.d:
            return self.d[k]
        return SparseIntMatrix.zeros(self.dims.get(k - 1, 0), self.dims.get(k, 0))

    @property
    def degrees(self) -> list[int]:
        return sorted(k for k, v in self.dims.items())

    def check_dd(self) -> bool:
        for k in self.d:
            if k - 1 in self.d:
                a, b = self.d[k - 1], self.d[k]
                if a.nnz == 0 or b.nnz == 0:
                    continue
                if a.vals.dtype == object or b.vals.dtype == object:
                    prod = _dense_product(a, b)
                    if any(any(r) for r in prod):
                        return False
                elif (a.to_scipy() @ b.to_scipy()).count_nonzero():
                    return False
        return True


def _dense_product(a: SparseIntMatrix, b: SparseIntMatrix) -> list[list[int]]:
    A, B = a.to_dense(), b.to_dense()
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*B)] for row in A]


def chain_complex_of(x: SimplicialComplex, reduced: bool = True, check: bool = True) -> ChainComplex:
    dims = {k: x.count(k) for k in range(x.dim + 1)}
    d = {k: boundary_matrix(x, k) for k in range(1, x.dim + 1)}
    if reduced:
        dims[-1] = 1
        d[0] = boundary_matrix(x, 0)
    cc = ChainComplex(dims, d)
    if check and not cc.check_dd():
        raise HomologyError("boundary of boundary is nonzero")
    return cc


def relative_chain_complex(x: SimplicialComplex, a: SimplicialComplex, vertex_map: np.ndarray | None = None,
                           check: bool = True) -> ChainComplex:
    """``C(x)/C(a)`` where ``a``'s vertex ``i`` is ``x``'s vertex ``vertex_map[i]`` (identity by default)."""
    keep: dict[int, np.ndarray] = {}
    for k in range(x.dim + 1):
        mask = np.ones(x.count(k), dtype=bool)
        if k <= a.dim:
            rows = a.simplices[k] if vertex_map is None else np.sort(np.asarray(vertex_map)[a.simplices[k]], axis=1)
            idx = x.index_of(k, rows)
            if (idx < 0).any():
                raise HomologyError("subcomplex is not contained in the complex")
            mask[idx] = False
        keep[k] = np.nonzero(mask)[0]
    dims = {k: len(v) for k, v in keep.items()}
    d = {k: boundary_matrix(x, k).restrict(keep[k - 1], keep[k]) for k in range(1, x.dim + 1)}
    cc = ChainComplex(dims, d)
    if check and not cc.check_dd():
        raise HomologyError("boundary of boundary is nonzero")
    return cc


def chain_homology(cc: ChainComplex, coeff: CoefficientDomain = Z,
                   degrees: Iterable[int] | None = None) -> dict[int, HomologyResult]:
    """Homology of a chain complex in the requested degrees (all by default)."""
    all_deg = cc.degrees
    if not all_deg:
        return {}
    want = sorted(set(all_deg if degrees is None else degrees) & set(all_deg))
    if not want:
        return {}
    modulus = coeff.modulus
    top = max(want) + 1
    elim: dict[int, Elimination] = {}
    prev: Elimination | None = None
    for k in range(min(all_deg), top + 1):
        D = cc.boundary(k)
        skip = prev.pivot_cols if prev is not None and prev.clean else None
        if D.shape[1] == 0:
            e = Elimination(0, [], np.zeros(0, dtype=np.int64), True)
        else:
            e = eliminate(D, modulus, skip_rows=skip if D.shape[0] else None)
        elim[k] = e
        prev = e
    out = {}
    for k in want:
        rank = cc.dims.get(k, 0) - elim[k].rank - elim[k + 1].rank
        tors = tuple(elim[k + 1].divisors) if modulus is None else ()
        h = HomologyResult(rank, tors)
        if coeff.kind == "Q":
            h = HomologyResult(rank)
        elif coeff.kind == "half":
            h = h.specialize(coeff)
        out[k] = h
    return out


def reduced_homology(x: SimplicialComplex, coeff: CoefficientDomain = Z,
                     max_degree: int | None = None) -> dict[int, HomologyResult]:
    cc = chain_complex_of(x, reduced=True, check=False)
    top = x.dim if max_degree is None else min(max_degree, x.dim)
    return chain_homology(cc, coeff, range(-1, top + 1))


def homology(x: SimplicialComplex, coeff: CoefficientDomain = Z) -> dict[int, HomologyResult]:
    return chain_homology(chain_complex_of(x, reduced=False, check=False), coeff)


def relative_homology(x: SimplicialComplex, a: SimplicialComplex, coeff: CoefficientDomain = Z,
                      vertex_map: np.ndarray | None = None,
                      max_degree: int | None = None) -> dict[int, HomologyResult]:
    cc = relative_chain_complex(x, a, vertex_map)
    degrees = None if max_degree is None else range(0, max_degree + 1)
    out = chain_homology(cc, coeff, degrees)
    for k in range(0, (x.dim if max_degree is None else max_degree) + 1):
        out.setdefault(k, HomologyResult(0))
    return out


# ---------------------------------------------------------------- sphericity


@dataclass
class ProxyResult:
    """Outcome of a homology-level connectivity check."""

    ok: bool
    detail: str = ""
    witness: object = None
    flag: str = "homology-proxy"

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "detail": self.detail, "flag": self.flag,
                "witness": None if self.witness is None else str(self.witness)}


def verify_spherical(x: SimplicialComplex, d: int) -> ProxyResult:
    """Dimension ``d`` and vanishing integral reduced homology below ``d``."""
    if x.dim != d:
        return ProxyResult(False, f"dimension {x.dim} != {d}")
    if d <= 0:
        return ProxyResult(True, "no degrees below the dimension" if d == 0 else "empty complex")
    h = reduced_homology(x, Z, max_degree=d - 1)
    for k in range(-1, d):
        if not h[k].is_zero():
            return ProxyResult(False, f"reduced H_{k} = {h[k]}", k)
    return ProxyResult(True, f"reduced homology vanishes below {d}")


def verify_cm(x: SimplicialComplex, d: int) -> ProxyResult:
    """Homology-level Cohen-Macaulay check with the first failing simplex as witness."""
    top = verify_spherical(x, d)
    if not top:
        return ProxyResult(False, "complex: " + top.detail)
    for p in range(0, d + 1):
        want = d - p - 1
        if p == d:
            break  # links of top simplices are empty in a d-dimensional complex
        if want == 0:
            # link must be a nonempty set of points: every (d-1)-simplex has a coface
            cof = np.zeros(x.count(p), dtype=np.int64)
            up = x.simplices[p + 1]
            for i in range(p + 2):
                cof += np.bincount(x.index_of(p, np.delete(up, i, axis=1)), minlength=x.count(p))
            bad = np.nonzero(cof == 0)[0]
            if len(bad):
                sigma = x.simplex_list(p)[bad[0]]
                return ProxyResult(False, f"link of {p}-simplex is empty", _named(x, sigma))
            continue
        for i, lk in links_of_all(x, p):
            res = verify_spherical(lk, want)
            if not res:
                sigma = x.simplex_list(p)[i]
                return ProxyResult(False, f"link of {p}-simplex: {res.detail}", _named(x, sigma))
    return ProxyResult(True, f"Cohen-Macaulay of dimension {d} at homology level")


def _named(x: SimplicialComplex, sigma: Sequence[int]) -> tuple:
    return tuple(x.payload(v) for v in sigma)


# ---------------------------------------------------------------- cycle bases


@dataclass
class HomologyBasis:
    """Generators and relations for ``H_d`` read off a tracked elimination.

    Generators are kernel vectors indexed by the free (non-pivot) columns of
    ``d_d``; a cycle's coordinates are its coefficients on those columns.
    """

    degree: int
    free: list[int]
    kernel: dict[int, dict[int, int]]
    relations: list[dict[int, int]]
    position: dict[int, int]
    clean: bool
    _dense: list[dict[int, int]] | None = None

    @property
    def rank(self) -> int:
        return len(self.free)

    def generator(self, i: int) -> dict[int, int]:
        return self.kernel[self.free[i]] if self._dense is None else self._dense[i]

    def coordinates(self, cycle: dict[int, int]) -> dict[int, int]:
        if self._dense is None:
            return {self.position[c]: v for c, v in cycle.items() if c in self.position and v}
        return _solve_in_basis(self._dense, cycle)


def _solve_in_basis(basis: list[dict[int, int]], vec: dict[int, int]) -> dict[int, int]:
    support = sorted({k for b in basis for k in b} | set(vec))
    idx = {k: i for i, k in enumerate(support)}
    rows = [[Fraction(0)] * (len(basis) + 1) for _ in support]
    for j, b in enumerate(basis):
        for k, x in b.items():
            rows[idx[k]][j] = Fraction(x)
    for k, x in vec.items():
        rows[idx[k]][-1] = Fraction(x)
    piv_cols, r = [], 0
    for c in range(len(basis)):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        rows[r] = [x / rows[r][c] for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    if any(rows[i][-1] for i in range(r, len(rows))):
        raise HomologyError("vector is not in the span of the cycle basis")
    out = {}
    for i, c in enumerate(piv_cols):
        x = rows[i][-1]
        if x.denominator != 1:
            raise HomologyError("non-integral coordinates")
        if x:
            out[c] = int(x)
    return out


def homology_basis(x: SimplicialComplex, d: int, reduced: bool = True) -> HomologyBasis:
    """Tracked cycle basis of ``C_d`` with boundaries from ``C_{d+1}`` as relations."""
    D = boundary_matrix(x, d) if (d > 0 or reduced) else SparseIntMatrix.zeros(0, x.count(0))
    if d == -1:
        D = SparseIntMatrix.zeros(0, 1)
    e = eliminate(D, track_kernel=True)
    free = sorted(e.kernel)
    position = {c: i for i, c in enumerate(free)}
    dense = None
    if not e.clean:
        dense = [e.kernel[c] for c in free] + e.kernel_extra
        free = list(range(len(dense)))
        position = {}
    basis = HomologyBasis(d, free, e.kernel, [], position, e.clean, dense)
    if d < x.dim:
        up = boundary_matrix(x, d + 1)
        cols: list[dict[int, int]] = [{} for _ in range(up.shape[1])]
        for r, c, v in zip(up.rows.tolist(), up.cols.tolist(), up.vals.tolist()):
            cols[c][r] = v
        basis.relations = [basis.coordinates(col) for col in cols]
    return basis
