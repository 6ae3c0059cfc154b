"""Simplicial complexes, posets and maps between them.

A complex stores its ``k``-simplices as a lexicographically sorted integer
array of shape ``(count, k+1)`` whose rows are increasing vertex ids.  The
sorted-id order fixes orientations for boundary maps everywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np


class ComplexError(ValueError):
    pass


def _normalize(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return rows.reshape(0, rows.shape[1] if rows.ndim == 2 else 0)
    rows = np.sort(rows, axis=1)
    return np.unique(rows, axis=0)


def _keys(rows: np.ndarray, base: int) -> np.ndarray:
    k = rows.shape[1]
    if base ** k >= 2 ** 62:
        raise ComplexError("simplex keys overflow; complex too large")
    weights = base ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return rows @ weights


@dataclass(eq=False)
class SimplicialComplex:
    """Downward-closed set of simplices over vertices ``0 .. num_vertices-1``."""

    simplices: list[np.ndarray]
    payloads: list[Hashable] | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)
    _keys: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.simplices = [_normalize(s) for s in self.simplices]
        while self.simplices and len(self.simplices[-1]) == 0:
            self.simplices.pop()
        if self.payloads is not None and len(self.payloads) < self.num_vertices:
            raise ComplexError("payload registry shorter than vertex set")

    # construction ------------------------------------------------------

    @classmethod
    def from_maximal(cls, facets: Iterable[Sequence[int]] | np.ndarray,
                     payloads: list[Hashable] | None = None, name: str = "") -> "SimplicialComplex":
        """Close a family of simplices (any sizes) under taking faces."""
        by_size: dict[int, list[np.ndarray]] = {}
        if isinstance(facets, np.ndarray):
            groups = {facets.shape[1]: [facets]} if facets.size else {}
        else:
            rows: dict[int, list[tuple[int, ...]]] = {}
            for f in facets:
                t = tuple(sorted(set(int(x) for x in f)))
                if t:
                    rows.setdefault(len(t), []).append(t)
            groups = {s: [np.array(r, dtype=np.int64)] for s, r in rows.items()}
        for size, arrs in groups.items():
            arr = _normalize(np.concatenate(arrs))
            for t in range(1, size + 1):
                for cols in itertools.combinations(range(size), t):
                    by_size.setdefault(t, []).append(arr[:, cols])
        top = max(by_size) if by_size else 0
        simplices = [_normalize(np.concatenate(by_size[t])) if t in by_size
                     else np.zeros((0, t), dtype=np.int64) for t in range(1, top + 1)]
        return cls(simplices, payloads, name)

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray], payloads: list[Hashable] | None = None,
                    name: str = "", check: bool = True) -> "SimplicialComplex":
        x = cls(list(arrays), payloads, name)
        if check and not x.is_downward_closed():
            raise ComplexError("simplex family is not downward closed")
        return x

    @classmethod
    def empty(cls) -> "SimplicialComplex":
        return cls([])

    # basic queries -----------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    @property
    def num_vertices(self) -> int:
        if not self.simplices:
            return 0
        return int(self.simplices[0].max()) + 1 if len(self.simplices[0]) else 0

    def vertex_ids(self) -> np.ndarray:
        return self.simplices[0][:, 0] if self.simplices else np.zeros(0, dtype=np.int64)

    def count(self, k: int) -> int:
        if k == -1:
            return 1
        return len(self.simplices[k]) if 0 <= k <= self.dim else 0

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.simplices)

    def keys(self, k: int) -> np.ndarray:
        if k not in self._keys:
            self._keys[k] = _keys(self.simplices[k], self.num_vertices + 1)
        return self._keys[k]

    def index_of(self, k: int, rows: np.ndarray) -> np.ndarray:
        """Indices of the given sorted ``k``-simplex rows, ``-1`` where absent."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, k + 1)
        if k > self.dim or len(rows) == 0:
            return np.full(len(rows), -1, dtype=np.int64)
        keys = self.keys(k)
        q = _keys(rows, self.num_vertices + 1)
        pos = np.searchsorted(keys, q)
        pos = np.minimum(pos, len(keys) - 1)
        found = (keys[pos] == q) & (rows.max(axis=1) < self.num_vertices) & (rows.min(axis=1) >= 0)
        return np.where(found, pos, -1)

    def contains(self, simplex: Iterable[int]) -> bool:
        s = sorted(set(int(x) for x in simplex))
        if not s:
            return True
        return bool(self.index_of(len(s) - 1, np.array([s]))[0] >= 0)

    def simplex_list(self, k: int) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in r) for r in self.simplices[k]] if 0 <= k <= self.dim else []

    def payload(self, v: int) -> Hashable:
        return self.payloads[v] if self.payloads is not None else v

    def is_downward_closed(self) -> bool:
        for k in range(1, self.dim + 1):
            s = self.simplices[k]
            for i in range(k + 1):
                face = np.delete(s, i, axis=1)
                if (self.index_of(k - 1, face) < 0).any():
                    return False
        return True

    def maximal_simplices(self) -> list[np.ndarray]:
        out = []
        for k in range(self.dim + 1):
            if k == self.dim:
                out.append(self.simplices[k])
                continue
            covered = np.zeros(len(self.simplices[k]), dtype=bool)
            up = self.simplices[k + 1]
            for i in range(k + 2):
                idx = self.index_of(k, np.delete(up, i, axis=1))
                covered[idx[idx >= 0]] = True
            out.append(self.simplices[k][~covered])
        return out

    def is_pure(self, d: int) -> bool:
        if d != self.dim:
            return False
        return all(len(m) == 0 for m in self.maximal_simplices()[:-1])

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * len(s) for k, s in enumerate(self.simplices))

    def same_as(self, other: "SimplicialComplex") -> bool:
        """Structural equality including vertex payloads."""
        if self.f_vector() != other.f_vector():
            return False
        if self.payloads is not None or other.payloads is not None:
            if list(self.payloads or []) != list(other.payloads or []):
                return False
        return all(np.array_equal(a, b) for a, b in zip(self.simplices, other.simplices))

    def restrict(self, keep: Iterable[int]) -> "SimplicialComplex":
        """Full subcomplex on the given vertices (relabelled compactly)."""
        keep = np.array(sorted(set(int(v) for v in keep)), dtype=np.int64)
        return _relabel([s[np.isin(s, keep).all(axis=1)] for s in self.simplices], keep, self)

    def __repr__(self) -> str:
        return f"SimplicialComplex({self.name!r}, f={self.f_vector()})"


def _relabel(arrays: list[np.ndarray], vertices: np.ndarray, parent: SimplicialComplex | None,
             payloads: list | None = None) -> SimplicialComplex:
    remap = np.full((int(vertices.max()) + 1) if len(vertices) else 1, -1, dtype=np.int64)
    remap[vertices] = np.arange(len(vertices))
    arrays = [remap[a] for a in arrays if len(a)]
    if payloads is None and parent is not None and parent.payloads is not None:
        payloads = [parent.payloads[int(v)] for v in vertices]
    return SimplicialComplex(arrays, payloads)


def f_vector(x: SimplicialComplex) -> tuple[int, ...]:
    return x.f_vector()


def is_pure(x: SimplicialComplex, d: int) -> bool:
    return x.is_pure(d)


def link(x: SimplicialComplex, sigma: Iterable[int]) -> SimplicialComplex:
    """``{tau : tau and sigma disjoint, tau + sigma in x}``, vertices relabelled."""
    s = sorted(set(int(v) for v in sigma))
    if not x.contains(s):
        raise ComplexError(f"{s} is not a simplex")
    p = len(s)
    arrays = []
    for k in range(p, x.dim + 1):
        rows = x.simplices[k]
        hit = np.isin(rows, s).sum(axis=1) == p
        sub = rows[hit]
        if len(sub) == 0:
            break
        rest = sub[~np.isin(sub, s)].reshape(len(sub), k + 1 - p)
        if rest.shape[1]:
            arrays.append(rest)
    vertices = np.unique(arrays[0]) if arrays else np.zeros(0, dtype=np.int64)
    if len(vertices) == 0:
        return SimplicialComplex([], [] if x.payloads is not None else None)
    return _relabel(arrays, vertices, x)


def links_of_all(x: SimplicialComplex, p: int) -> Iterable[tuple[int, SimplicialComplex]]:
    """Links of every ``p``-simplex, grouped in one pass over the simplex arrays."""
    if p > x.dim:
        return
    n_sigma = x.count(p)
    per_dim: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    for k in range(p + 1, x.dim + 1):
        rows = x.simplices[k]
        owners, rests = [], []
        for cols in itertools.combinations(range(k + 1), p + 1):
            other = [c for c in range(k + 1) if c not in cols]
            owners.append(x.index_of(p, rows[:, cols]))
            rests.append(rows[:, other])
        owner = np.concatenate(owners)
        rest = np.concatenate(rests)
        order = np.argsort(owner, kind="stable")
        owner, rest = owner[order], rest[order]
        bounds = np.searchsorted(owner, np.arange(n_sigma + 1))
        per_dim.append((owner, rest, bounds))
    for i in range(n_sigma):
        arrays = [rest[b[i]:b[i + 1]] for (_, rest, b) in per_dim]
        arrays = [a for a in arrays if len(a)]
        if not arrays:
            yield i, SimplicialComplex([])
            continue
        vertices = np.unique(arrays[0])
        yield i, _relabel(arrays, vertices, None)


def join(x: SimplicialComplex, y: SimplicialComplex) -> SimplicialComplex:
    """Join with ``y``'s vertices placed after ``x``'s."""
    if x.payloads is not None and y.payloads is not None:
        if set(x.payloads[:x.num_vertices]) & set(y.payloads[:y.num_vertices]):
            raise ComplexError("vertex registries collide")
    nx = x.num_vertices
    xs = [np.zeros((1, 0), dtype=np.int64)] + list(x.simplices)
    ys = [np.zeros((1, 0), dtype=np.int64)] + [s + nx for s in y.simplices]
    by_size: dict[int, list[np.ndarray]] = {}
    for a in xs:
        for b in ys:
            if a.shape[1] + b.shape[1] == 0 or len(a) == 0 or len(b) == 0:
                continue
            rows = np.concatenate([np.repeat(a, len(b), axis=0), np.tile(b, (len(a), 1))], axis=1)
            by_size.setdefault(rows.shape[1], []).append(rows)
    top = max(by_size) if by_size else 0
    arrays = [np.concatenate(by_size[t]) for t in range(1, top + 1)]
    payloads = None
    if x.payloads is not None and y.payloads is not None:
        payloads = list(x.payloads[:nx]) + list(y.payloads[:y.num_vertices])
    return SimplicialComplex(arrays, payloads)


# ---------------------------------------------------------------- posets


@dataclass(eq=False)
class Poset:
    """Finite poset with a dense strict-order matrix ``less[i, j]`` meaning ``i < j``."""

    elements: list[Any]
    less: np.ndarray
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.less = np.asarray(self.less, dtype=bool).reshape(len(self.elements), len(self.elements))
        self._index: dict[Any, int] | None = None

    @classmethod
    def from_relation(cls, elements: list[Any], lt: Callable[[Any, Any], bool], name: str = "") -> "Poset":
        n = len(elements)
        less = np.zeros((n, n), dtype=bool)
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                if i != j and lt(a, b):
                    less[i, j] = True
        return cls(elements, less, name)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, element: Any) -> int:
        if self._index is None:
            self._index = {e: i for i, e in enumerate(self.elements)}
        return self._index[element]

    def get_index(self, element: Any) -> int | None:
        try:
            return self.index(element)
        except KeyError:
            return None

    def check(self) -> bool:
        """Irreflexive, antisymmetric and transitive."""
        L = self.less
        if L.diagonal().any() or (L & L.T).any():
            return False
        if len(L) == 0:
            return True
        two = (L.astype(np.int64) @ L.astype(np.int64)) > 0
        return bool(not (two & ~L).any())

    def covers(self) -> list[tuple[int, int]]:
        L = self.less.astype(np.int64)
        between = (L @ L) > 0
        cov = self.less & ~between
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(cov))]

    def subposet(self, keep: Sequence[int], name: str = "") -> "Poset":
        keep = list(keep)
        return Poset([self.elements[i] for i in keep], self.less[np.ix_(keep, keep)], name)

    def above(self, i: int) -> "Poset":
        return self.subposet(list(np.nonzero(self.less[i])[0]))

    def below(self, i: int) -> "Poset":
        return self.subposet(list(np.nonzero(self.less[:, i])[0]))

    def interval(self, i: int, j: int) -> "Poset":
        return self.subposet(list(np.nonzero(self.less[i] & self.less[:, j])[0]))

    def chains(self) -> list[np.ndarray]:
        """All nonempty chains, by length, as rows of element ids in increasing order."""
        n = len(self.elements)
        if n == 0:
            return []
        out = [np.arange(n, dtype=np.int64)[:, None]]
        while True:
            cur = out[-1]
            ci, ej = np.nonzero(self.less[cur[:, -1]])
            if len(ci) == 0:
                break
            out.append(np.concatenate([cur[ci], ej[:, None]], axis=1))
        return out

    def dimension(self) -> int:
        return len(self.chains()) - 1

    def order_complex(self) -> SimplicialComplex:
        return SimplicialComplex(self.chains(), list(self.elements), self.name)

    def is_antichain(self) -> bool:
        return not self.less.any()


def order_complex(p: Poset) -> SimplicialComplex:
    return p.order_complex()


# ---------------------------------------------------------------- maps


@dataclass(eq=False)
class PosetMap:
    source: Poset
    target: Poset
    assignment: np.ndarray
    reversing: bool = False

    def __post_init__(self) -> None:
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if len(self.assignment) != len(self.source):
            raise ComplexError("assignment length mismatch")
        if not self.is_monotone():
            raise ComplexError("map is not order-" + ("reversing" if self.reversing else "preserving"))

    def is_monotone(self) -> bool:
        f = self.assignment
        i, j = np.nonzero(self.source.less)
        a, b = (f[j], f[i]) if self.reversing else (f[i], f[j])
        return bool(((a == b) | self.target.less[a, b]).all())

    def is_surjective(self) -> bool:
        return len(np.unique(self.assignment)) == len(self.target)

    def is_isomorphism(self) -> bool:
        f = self.assignment
        if len(self.source) != len(self.target) or not self.is_surjective():
            return False
        src = self.source.less
        tgt = self.target.less[np.ix_(f, f)]
        return bool(np.array_equal(src, tgt.T if self.reversing else tgt))

    def __call__(self, i: int) -> int:
        return int(self.assignment[i])


@dataclass(eq=False)
class SimplicialMap:
    source: SimplicialComplex
    target: SimplicialComplex
    vertex_map: np.ndarray

    def __post_init__(self) -> None:
        self.vertex_map = np.asarray(self.vertex_map, dtype=np.int64)
        if not self.is_simplicial():
            raise ComplexError("vertex map is not simplicial")

    def image_rows(self, k: int) -> np.ndarray:
        return self.vertex_map[self.source.simplices[k]]

    def is_simplicial(self) -> bool:
        for k in range(self.source.dim + 1):
            img = self.image_rows(k)
            for size in range(1, k + 2):
                mask = np.array([len(set(r)) == size for r in img.tolist()]) if len(img) else np.zeros(0, bool)
                if not mask.any():
                    continue
                rows = np.array([sorted(set(r)) for r in img[mask].tolist()], dtype=np.int64)
                if (self.target.index_of(size - 1, rows) < 0).any():
                    return False
        return True

    def injective_on_simplices(self) -> bool:
        for k in range(1, self.source.dim + 1):
            img = np.sort(self.image_rows(k), axis=1)
            if (img[:, 1:] == img[:, :-1]).any():
                return False
        return True

    def is_isomorphism(self) -> bool:
        if self.source.f_vector() != self.target.f_vector():
            return False
        if len(np.unique(self.vertex_map)) != self.target.num_vertices:
            return False
        for k in range(self.source.dim + 1):
            img = np.sort(self.image_rows(k), axis=1)
            idx = self.target.index_of(k, img)
            if (idx < 0).any() or len(np.unique(idx)) != len(idx):
                return False
        return True


def complete_join_check(pi: SimplicialMap) -> bool:
    """``pi`` injective on simplices and every simplex fiber is the join of vertex fibers."""
    X, Y = pi.target, pi.source
    fiber = np.bincount(pi.vertex_map[Y.vertex_ids()], minlength=X.num_vertices)
    if (fiber == 0).any():
        raise ComplexError("map is not surjective on vertices")
    if not pi.injective_on_simplices():
        return False
    for k in range(X.dim + 1):
        expected = np.prod(fiber[X.simplices[k]], axis=1)
        got = np.zeros(len(X.simplices[k]), dtype=np.int64)
        if k <= Y.dim:
            idx = X.index_of(k, np.sort(pi.image_rows(k), axis=1))
            got = np.bincount(idx, minlength=len(X.simplices[k]))
        if not np.array_equal(got, expected):
            return False
    return True


def simplex_poset(x: SimplicialComplex, max_dim: int | None = None) -> Poset:
    """Face poset of ``x`` (optionally truncated), elements are sorted vertex tuples."""
    top = x.dim if max_dim is None else min(max_dim, x.dim)
    elements = [s for k in range(top + 1) for s in x.simplex_list(k)]
    sets = [frozenset(s) for s in elements]
    less = np.array([[a < b for b in sets] for a in sets], dtype=bool)
    return Poset(elements, less.reshape(len(sets), len(sets)))
