"""Module linear algebra over finite rings.

Conventions: left modules, row vectors, matrices acting on the right.  A
vector of ``R^n`` is a tuple of element indices; a matrix is a tuple of row
tuples.  ``FreeModule`` numbers the vectors of ``R^n`` lexicographically
(``code``) so that submodules can be stored as sets of codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .rings import Ring, opposite

Vector = tuple[int, ...]
Matrix = tuple[tuple[int, ...], ...]

ELEMENT_SET_GUARD = 200_000


class LinalgError(ValueError):
    pass


class GuardExceeded(LinalgError):
    pass


# ---------------------------------------------------------------- free modules


class FreeModule:
    """Coordinates and vectorized arithmetic for all vectors of ``R^n``."""

    def __init__(self, ring: Ring, n: int, guard: int = ELEMENT_SET_GUARD):
        size = ring.size ** n
        if size > guard:
            raise GuardExceeded(f"|{ring.name}|^{n} = {size} exceeds guard {guard}")
        self.ring = ring
        self.n = n
        self.size = size
        self.strides = np.array([ring.size ** (n - 1 - i) for i in range(n)], dtype=np.int64)
        codes = np.arange(size, dtype=np.int64)
        self.coords = (codes[:, None] // self.strides[None, :]) % ring.size if n else np.zeros((1, 0), np.int64)
        self._smul: np.ndarray | None = None
        self._add: np.ndarray | None = None

    def code(self, v: Sequence[int]) -> int:
        return int(np.dot(np.asarray(v, dtype=np.int64), self.strides)) if self.n else 0

    def vector(self, c: int) -> Vector:
        return tuple(int(x) for x in self.coords[c])

    def encode(self, coords: np.ndarray) -> np.ndarray:
        return coords @ self.strides

    @property
    def smul(self) -> np.ndarray:
        """``smul[r, c]`` is the code of ``r * vector(c)``."""
        if self._smul is None:
            R = self.ring
            self._smul = np.stack([self.encode(R.mul[r, self.coords]) for r in range(R.size)])
        return self._smul

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.size <= 4096:
            if self._add is None:
                self._add = self.encode(self.ring.add[self.coords[:, None, :], self.coords[None, :, :]])
            return self._add[a, b]
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        return self.encode(self.ring.add[self.coords[a], self.coords[b]])

    def right_pairing(self, rows: np.ndarray, cols: np.ndarray | None = None) -> np.ndarray:
        """``out[i, c] = sum_j rows[i, j] * coords[c, j]``: row vectors against column vectors."""
        R = self.ring
        cols = self.coords if cols is None else cols
        rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
        out = np.zeros((rows.shape[0], cols.shape[0]), dtype=np.int64)
        for j in range(self.n):
            out = R.add[out, R.mul[rows[:, j][:, None], cols[None, :, j]]]
        return out

    def times(self, m: Sequence[Sequence[int]]) -> np.ndarray:
        """Codes of ``x . m`` for every vector ``x`` (``m`` has ``n`` rows)."""
        R = self.ring
        m = np.asarray(m, dtype=np.int64)
        out = np.zeros((self.size, m.shape[1]), dtype=np.int64)
        for i in range(self.n):
            out = R.add[out, R.mul[self.coords[:, i][:, None], m[i][None, :]]]
        return out

    def span_codes(self, vectors: Iterable[Sequence[int]]) -> np.ndarray:
        """Sorted codes of the left span."""
        span = np.zeros(1, dtype=np.int64)
        for v in vectors:
            orbit = np.unique(self.smul[:, self.code(v)])
            span = np.unique(self.add(span[:, None], orbit[None, :]))
        return span


@lru_cache(maxsize=64)
def free_module(ring: Ring, n: int) -> FreeModule:
    return FreeModule(ring, n)


# ---------------------------------------------------------------- matrices


def identity(ring: Ring, n: int) -> Matrix:
    return tuple(tuple(ring.one if i == j else 0 for j in range(n)) for i in range(n))


def unit_vector(ring: Ring, n: int, i: int) -> Vector:
    return tuple(ring.one if j == i else 0 for j in range(n))


def vec_add(ring: Ring, u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(int(ring.add[a, b]) for a, b in zip(u, v))


def vec_neg(ring: Ring, u: Sequence[int]) -> Vector:
    return tuple(int(ring.neg[a]) for a in u)


def scalar_mul(ring: Ring, r: int, v: Sequence[int]) -> Vector:
    return tuple(int(ring.mul[r, a]) for a in v)


def vec_mat(ring: Ring, v: Sequence[int], m: Sequence[Sequence[int]]) -> Vector:
    """Row vector times matrix."""
    cols = len(m[0]) if len(m) else 0
    out = []
    for j in range(cols):
        acc = 0
        for i, a in enumerate(v):
            acc = ring.add[acc, ring.mul[a, m[i][j]]]
        out.append(int(acc))
    return tuple(out)


def mat_mul(ring: Ring, a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> Matrix:
    return tuple(vec_mat(ring, row, b) for row in a)


def transpose(m: Sequence[Sequence[int]]) -> Matrix:
    return tuple(zip(*m)) if len(m) else ()


def mat_inverse(ring: Ring, m: Sequence[Sequence[int]]) -> Matrix:
    """Two-sided inverse of a square matrix, found from the action on all of ``R^n``."""
    n = len(m)
    fm = free_module(ring, n)
    images = fm.encode(fm.times(m))
    if len(np.unique(images)) != fm.size:
        raise LinalgError("matrix is not invertible")
    where = np.empty(fm.size, dtype=np.int64)
    where[images] = np.arange(fm.size)
    inv = tuple(fm.vector(int(where[fm.code(unit_vector(ring, n, i))])) for i in range(n))
    if mat_mul(ring, m, inv) != identity(ring, n):
        raise LinalgError("matrix has a one-sided inverse only")
    return inv


def parse_matrix(text: str) -> Matrix:
    """Rows of comma-separated element indices, rows separated by semicolons."""
    text = text.strip()
    if not text:
        return ()
    rows = tuple(tuple(int(x) for x in row.split(",")) for row in text.split(";"))
    if len({len(r) for r in rows}) > 1:
        raise LinalgError("ragged matrix")
    return rows


def format_matrix(m: Sequence[Sequence[int]]) -> str:
    return ";".join(",".join(str(int(x)) for x in row) for row in m)


# ---------------------------------------------------------------- unimodularity


def _is_local(ring: Ring) -> bool:
    non_units = [a for a in range(ring.size) if not ring.is_unit(a)]
    nu = np.array(non_units)
    return bool(np.isin(ring.add[nu[:, None], nu[None, :]], nu).all())


@lru_cache(maxsize=64)
def ring_is_local(ring: Ring) -> bool:
    return _is_local(ring)


def _right_ideal_sum(ring: Ring, v: Sequence[int]) -> np.ndarray:
    """Mask of all sums ``sum_i v_i a_i``."""
    reach = np.zeros(ring.size, dtype=bool)
    reach[0] = True
    for x in v:
        multiples = np.unique(ring.mul[x, :])
        cur = np.nonzero(reach)[0]
        reach = np.zeros(ring.size, dtype=bool)
        reach[ring.add[cur[:, None], multiples[None, :]].ravel()] = True
    return reach


def is_unimodular(ring: Ring, v: Sequence[int]) -> bool:
    """Some right combination of the coordinates equals 1."""
    if len(v) == 0:
        raise LinalgError("zero-length vector")
    if ring.kind == "ZmodN":
        return math.gcd(*[int(x) for x in v], ring.params["N"]) == 1
    if ring_is_local(ring):
        return any(ring.is_unit(int(x)) for x in v)
    return bool(_right_ideal_sum(ring, v)[ring.one])


def _primes(N: int) -> list[int]:
    out, p = [], 2
    while p * p <= N:
        if N % p == 0:
            out.append(p)
            while N % p == 0:
                N //= p
        p += 1
    if N > 1:
        out.append(N)
    return out


def _rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    m = [[x % p for x in r] for r in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][c], -1, p)
        m[rank] = [(x * inv) % p for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def has_right_inverse(ring: Ring, rows: Sequence[Sequence[int]]) -> bool:
    """Direct search: for each ``l`` some column ``a`` with ``rows . a = e_l``."""
    k = len(rows)
    if k == 0:
        return True
    n = len(rows[0])
    fm = free_module(ring, n)
    vals = fm.right_pairing(np.asarray(rows, dtype=np.int64))
    for l in range(k):
        target = np.zeros(k, dtype=np.int64)
        target[l] = ring.one
        if not (vals == target[:, None]).all(axis=0).any():
            return False
    return True


def is_partial_basis(ring: Ring, vs: Sequence[Sequence[int]], n: int | None = None) -> bool:
    """Rows form a basis of a free direct summand of ``R^n``."""
    vs = [tuple(int(x) for x in v) for v in vs]
    if n is None:
        n = len(vs[0]) if vs else 0
    if any(len(v) != n for v in vs):
        raise LinalgError("ambient rank mismatch")
    if len(vs) > n:
        return False
    if len(set(vs)) != len(vs):
        return False
    if not vs:
        return True
    if ring.kind == "ZmodN":
        return all(_rank_mod_p(vs, p) == len(vs) for p in _primes(ring.params["N"]))
    if ring.kind == "GaloisField" and ring.params["k"] == 1:
        return _rank_mod_p(vs, ring.params["p"]) == len(vs)
    return has_right_inverse(ring, vs)


def extends_to_basis(ring: Ring, vs: Sequence[Sequence[int]], n: int) -> list[Vector] | None:
    """Greedy completion in lexicographic order; ``None`` if it gets stuck."""
    basis = [tuple(int(x) for x in v) for v in vs]
    if not is_partial_basis(ring, basis, n):
        raise LinalgError("input is not a partial basis")
    fm = free_module(ring, n)
    while len(basis) < n:
        for c in range(1, fm.size):
            w = fm.vector(c)
            if w not in basis and is_partial_basis(ring, basis + [w], n):
                basis.append(w)
                break
        else:
            return None
    return basis


# ---------------------------------------------------------------- canonical forms


def _unit_normalizer(a: int, N: int) -> int:
    """A unit ``u`` of Z/N with ``u*a = gcd(a, N)``."""
    g = math.gcd(a, N)
    for u in range(1, N):
        if math.gcd(u, N) == 1 and (u * a) % N == g % N:
            return u
    return 1


def _gcdex(a: int, b: int) -> tuple[int, int, int, int, int]:
    """``g, s, t, u, v`` with ``s*a + t*b = g`` and ``u*a + v*b = 0``, determinant 1."""
    if b == 0:
        return a, 1, 0, 0, 1
    if a == 0:
        return b, 0, 1, -1, 0
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    g = old_r
    return g, old_s, old_t, -b // g, a // g


def howell_form(ring_or_N: Ring | int, m: Sequence[Sequence[int]]) -> Matrix:
    """Howell normal form of a matrix over Z/N (zero rows dropped)."""
    if isinstance(ring_or_N, Ring):
        if ring_or_N.kind != "ZmodN":
            raise LinalgError("Howell form needs a Z/N ring")
        N = ring_or_N.params["N"]
    else:
        N = ring_or_N
    rows = [[int(x) % N for x in r] for r in m]
    if not rows:
        return ()
    ncols = len(rows[0])
    rows += [[0] * ncols for _ in range(max(0, ncols - len(rows)))]
    r = 0
    for j in range(ncols):
        i = r + 1
        while i < len(rows):
            if rows[i][j]:
                if r >= len(rows):
                    break
                g, s, t, u, v = _gcdex(rows[r][j], rows[i][j])
                a, b = rows[r], rows[i]
                rows[r] = [(s * x + t * y) % N for x, y in zip(a, b)]
                rows[i] = [(u * x + v * y) % N for x, y in zip(a, b)]
            i += 1
        if r >= len(rows) or rows[r][j] == 0:
            continue
        unit = _unit_normalizer(rows[r][j], N)
        rows[r] = [(unit * x) % N for x in rows[r]]
        p = rows[r][j]
        for i in range(r):
            q = rows[i][j] // p
            if q:
                rows[i] = [(x - q * y) % N for x, y in zip(rows[i], rows[r])]
        ann = N // p
        if ann != N and ann % N:
            extra = [(ann * x) % N for x in rows[r]]
            if any(extra):
                rows.append(extra)
        r += 1
    return tuple(tuple(row) for row in rows if any(row))


def rref(ring: Ring, m: Sequence[Sequence[int]]) -> Matrix:
    """Reduced row echelon form over a finite field (zero rows dropped)."""
    if not ring.is_field:
        raise LinalgError("rref needs a field")
    rows = [list(int(x) for x in r) for r in m]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for j in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][j]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = ring.inverse[rows[r][j]]
        rows[r] = [int(ring.mul[inv, x]) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][j]:
                f = rows[i][j]
                rows[i] = [int(ring.sub[x, ring.mul[f, y]]) for x, y in zip(rows[i], rows[r])]
        r += 1
    return tuple(tuple(row) for row in rows[:r])


# ---------------------------------------------------------------- submodules


@dataclass(eq=False)
class Submodule:
    """A submodule of ``R^n`` stored as its sorted set of vector codes."""

    ring: Ring
    n: int
    codes: frozenset[int]
    generators: Matrix | None = None
    free_rank: int | None = None
    witness: tuple[Vector, ...] | None = None
    _key: bytes = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._key = np.array(sorted(self.codes), dtype=np.int64).tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Submodule):
            return NotImplemented
        return self.n == other.n and self.codes == other.codes

    def __hash__(self) -> int:
        return hash((self.n, self._key))

    def __le__(self, other: "Submodule") -> bool:
        return self.codes <= other.codes

    def __lt__(self, other: "Submodule") -> bool:
        return self.codes < other.codes

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, v: Sequence[int]) -> bool:
        return free_module(self.ring, self.n).code(v) in self.codes

    def __repr__(self) -> str:
        gens = self.witness or self.generators
        return f"Submodule(n={self.n}, size={len(self.codes)}, gens={gens})"

    @property
    def key(self) -> tuple[int, ...]:
        return tuple(sorted(self.codes))

    def vectors(self) -> list[Vector]:
        fm = free_module(self.ring, self.n)
        return [fm.vector(c) for c in sorted(self.codes)]

    def is_zero(self) -> bool:
        return len(self.codes) == 1

    def is_full(self) -> bool:
        return len(self.codes) == self.ring.size ** self.n

    def intersection(self, other: "Submodule") -> "Submodule":
        return Submodule(self.ring, self.n, self.codes & other.codes)

    def sum(self, other: "Submodule") -> "Submodule":
        return span_submodule(self.ring, list(self.spanning_set()) + list(other.spanning_set()), self.n)

    def spanning_set(self) -> list[Vector]:
        if self.witness is not None:
            return list(self.witness)
        if self.generators is not None:
            return list(self.generators)
        return self.vectors()

    def image(self, m: Sequence[Sequence[int]]) -> "Submodule":
        """``self . m`` for an invertible matrix ``m`` (witness transported)."""
        gens = [vec_mat(self.ring, v, m) for v in self.spanning_set()]
        out = span_submodule(self.ring, gens, self.n)
        if self.witness is not None:
            out.free_rank = self.free_rank
            out.witness = tuple(gens)
        return out


def _canonical_generators(ring: Ring, vs: Sequence[Sequence[int]], n: int) -> Matrix | None:
    if not vs:
        return ()
    if ring.kind == "ZmodN":
        return howell_form(ring, vs)
    if ring.is_field:
        return rref(ring, vs)
    return None


def span_submodule(ring: Ring, vs: Sequence[Sequence[int]], n: int) -> Submodule:
    vs = [tuple(int(x) for x in v) for v in vs]
    if any(len(v) != n for v in vs):
        raise LinalgError("ambient rank mismatch")
    fm = free_module(ring, n)
    codes = frozenset(int(c) for c in fm.span_codes(vs))
    return Submodule(ring, n, codes, _canonical_generators(ring, vs, n))


def submodule_from_codes(ring: Ring, n: int, codes: Iterable[int]) -> Submodule:
    return Submodule(ring, n, frozenset(int(c) for c in codes))


def _rank_from_size(ring: Ring, size: int) -> int | None:
    r = round(math.log(size, ring.size)) if size > 1 else 0
    return r if ring.size ** r == size else None


def is_free_summand(s: Submodule, max_steps: int = 100_000) -> int | None:
    """Rank of ``s`` if it is a free direct summand; stores a partial-basis witness."""
    if s.witness is not None:
        return s.free_rank
    ring, n = s.ring, s.n
    r = _rank_from_size(ring, len(s.codes))
    if r is None:
        return None
    if r == 0:
        s.free_rank, s.witness = 0, ()
        return 0
    fm = free_module(ring, n)
    members = sorted(s.codes)
    steps = 0

    def search(chosen: list[Vector], span: set[int]) -> list[Vector] | None:
        nonlocal steps
        if len(chosen) == r:
            return chosen if len(span) == len(s.codes) else None
        for c in members:
            if c in span:
                continue
            steps += 1
            if steps > max_steps:
                raise GuardExceeded("free-summand search exceeded its step guard")
            w = fm.vector(c)
            if not is_partial_basis(ring, chosen + [w], n):
                continue
            new_span = set(int(x) for x in fm.span_codes(chosen + [w]))
            if len(new_span) != ring.size ** (len(chosen) + 1):
                continue
            found = search(chosen + [w], new_span)
            if found is not None:
                return found
            if ring_is_local(ring) or ring.is_field:
                return None  # any extension works over local rings; failure is final
        return None

    found = search([], {0})
    if found is None:
        return None
    s.free_rank, s.witness = r, tuple(found)
    return r


def complement_of(s: Submodule) -> Submodule:
    """A free complement from the lexicographic completion of the witness basis."""
    if is_free_summand(s) is None:
        raise LinalgError("not a free summand")
    basis = extends_to_basis(s.ring, list(s.witness), s.n)
    if basis is None:
        raise LinalgError("witness does not extend to a basis")
    extra = basis[len(s.witness):]
    c = span_submodule(s.ring, extra, s.n)
    c.free_rank, c.witness = len(extra), tuple(extra)
    return c


def is_direct_sum(parts: Sequence[Submodule], whole: Submodule) -> bool:
    """``whole`` is the internal direct sum of ``parts`` (checked by counting)."""
    if math.prod(len(p) for p in parts) != len(whole):
        return False
    total = parts[0]
    for p in parts[1:]:
        if len(total.intersection(p)) != 1:
            return False
        total = total.sum(p)
    return total == whole


def annihilator_dual(s: Submodule) -> Submodule:
    """``{f in (R^op)^n : sum_i v_i f_i = 0 for v in s}``, a submodule over ``R^op``."""
    ring, n = s.ring, s.n
    op = opposite(ring)
    fm = free_module(op, n)
    gens = np.asarray(s.spanning_set() or [tuple([0] * n)], dtype=np.int64)
    vals = free_module(ring, n).right_pairing(gens, fm.coords)
    codes = np.nonzero((vals == 0).all(axis=0))[0]
    out = Submodule(op, n, frozenset(int(c) for c in codes))
    if ring.kind == "ZmodN":
        out.generators = howell_form(ring, [fm.vector(int(c)) for c in codes])
    return out


def inverse_transpose(ring: Ring, m: Sequence[Sequence[int]]) -> Matrix:
    """Matrix of ``(m^-1)^*`` acting on row vectors of ``(R^op)^n``."""
    return transpose(mat_inverse(ring, m))


def dual_pairing(ring: Ring, x: Sequence[int], f: Sequence[int]) -> int:
    acc = 0
    for a, b in zip(x, f):
        acc = ring.add[acc, ring.mul[a, b]]
    return int(acc)


def unimodular_vectors(ring: Ring, n: int) -> list[Vector]:
    fm = free_module(ring, n)
    return [fm.vector(c) for c in range(1, fm.size) if is_unimodular(ring, fm.vector(c))]
