"""Finite unital rings given by explicit element tables.

Elements are indices ``0 .. size-1`` into the ring's tables; index 0 is
always the additive identity.  ``RingElem`` wraps an index for interactive
use, while the rest of the package works with bare indices.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_GUARD = 4096

# Conway polynomials, lowest coefficient first, leading 1 omitted.
CONWAY = {
    (2, 2): (1, 1),
    (2, 3): (1, 1, 0),
    (2, 4): (1, 1, 0, 0),
    (2, 5): (1, 0, 1, 0, 0),
    (2, 6): (1, 1, 0, 1, 1, 0),
    (2, 7): (1, 1, 0, 0, 0, 0, 0),
    (2, 8): (1, 0, 1, 1, 1, 0, 0, 0),
    (3, 2): (2, 2),
    (3, 3): (1, 2, 0),
    (3, 4): (2, 0, 0, 2),
    (5, 2): (2, 4),
    (5, 3): (3, 3, 0),
    (7, 2): (3, 6),
    (7, 3): (4, 0, 6),
}


class RingError(ValueError):
    pass


@dataclass(eq=False)
class Ring:
    """A finite unital ring.

    ``add`` and ``mul`` are ``size x size`` integer tables; ``mul[a, b]`` is
    the product ``a*b``.  ``kind`` and ``params`` record how the ring was
    built so that it can be serialized and re-parsed.
    """

    name: str
    kind: str
    params: dict
    labels: list[str]
    add: np.ndarray
    mul: np.ndarray
    one: int
    guard: int = DEFAULT_GUARD
    neg: np.ndarray = field(init=False)
    sub: np.ndarray = field(init=False)
    unit_list: tuple[int, ...] = field(init=False)
    inverse: dict[int, int] = field(init=False)
    commutative: bool = field(init=False)

    def __post_init__(self) -> None:
        n = len(self.labels)
        self.add = np.ascontiguousarray(self.add, dtype=np.int64)
        self.mul = np.ascontiguousarray(self.mul, dtype=np.int64)
        self.add.setflags(write=False)
        self.mul.setflags(write=False)
        neg = np.array([int(np.nonzero(self.add[a] == 0)[0][0]) for a in range(n)])
        self.neg = neg
        self.neg.setflags(write=False)
        self.sub = self.add[:, neg]
        self.sub.setflags(write=False)
        left = self.mul == self.one
        both = left & left.T
        inv = {}
        for a in range(n):
            hits = np.nonzero(both[a])[0]
            if len(hits):
                inv[a] = int(hits[0])
        self.inverse = inv
        self.unit_list = tuple(sorted(inv))
        self.commutative = bool(np.array_equal(self.mul, self.mul.T))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def zero(self) -> int:
        return 0

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"Ring({self.name!r}, size={self.size})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ring):
            return NotImplemented
        return (self.size == other.size and self.one == other.one
                and np.array_equal(self.add, other.add)
                and np.array_equal(self.mul, other.mul))

    def __hash__(self) -> int:
        return hash((self.name, self.size))

    def elements(self) -> range:
        return range(self.size)

    def is_unit(self, a: int) -> bool:
        return a in self.inverse

    def units(self) -> frozenset[int]:
        return frozenset(self.unit_list)

    def nonzero(self) -> list[int]:
        return list(range(1, self.size))

    def elem(self, a: int) -> "RingElem":
        return RingElem(self, a)

    def index_of(self, label: str) -> int:
        return self.labels.index(label)

    def to_json(self) -> dict:
        return {"kind": self.kind, "spec": self.name, "params": _jsonable(self.params),
                "elements": self.size, "commutative": self.commutative}

    @property
    def is_field(self) -> bool:
        return len(self.unit_list) == self.size - 1

    @property
    def characteristic(self) -> int:
        k, x = 1, self.one
        while x != 0:
            x = int(self.add[x, self.one])
            k += 1
        return k


def _jsonable(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, Ring):
            out[k] = v.name
        elif isinstance(v, (list, tuple)):
            out[k] = [x.name if isinstance(x, Ring) else x for x in v]
        else:
            out[k] = v
    return out


@dataclass(frozen=True)
class RingElem:
    ring: Ring
    index: int

    def __post_init__(self) -> None:
        if not 0 <= self.index < self.ring.size:
            raise RingError(f"index {self.index} out of range for {self.ring.name}")

    def _other(self, other: "RingElem | int") -> int:
        if isinstance(other, RingElem):
            if other.ring is not self.ring and other.ring != self.ring:
                raise RingError("elements of different rings")
            return other.index
        return other

    def __add__(self, other: "RingElem | int") -> "RingElem":
        return RingElem(self.ring, int(self.ring.add[self.index, self._other(other)]))

    def __sub__(self, other: "RingElem | int") -> "RingElem":
        return RingElem(self.ring, int(self.ring.sub[self.index, self._other(other)]))

    def __mul__(self, other: "RingElem | int") -> "RingElem":
        return RingElem(self.ring, int(self.ring.mul[self.index, self._other(other)]))

    def __neg__(self) -> "RingElem":
        return RingElem(self.ring, int(self.ring.neg[self.index]))

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.index)

    def inverse(self) -> "RingElem":
        if self.index not in self.ring.inverse:
            raise RingError(f"{self} is not a unit")
        return RingElem(self.ring, self.ring.inverse[self.index])

    def __repr__(self) -> str:
        return f"{self.ring.labels[self.index]}"


# ---------------------------------------------------------------- builders


def _check_guard(size: int, guard: int, what: str) -> None:
    if size > guard:
        raise RingError(f"{what} has {size} elements, over the guard of {guard}")


def zmod(N: int, guard: int = DEFAULT_GUARD) -> Ring:
    if N < 2:
        raise RingError("Z/N requires N >= 2")
    _check_guard(N, guard, f"Z/{N}")
    a = np.arange(N)
    return Ring(f"Z/{N}", "ZmodN", {"N": N}, [str(i) for i in range(N)],
                (a[:, None] + a[None, :]) % N, (a[:, None] * a[None, :]) % N, 1 % N, guard)


def _prime_power(q: int) -> tuple[int, int] | None:
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            k, x = 0, q
            while x % p == 0:
                x //= p
                k += 1
            return (p, k) if x == 1 else None
    return None


def _poly_irreducible(p: int, coeffs: tuple[int, ...]) -> bool:
    """Monic polynomial with lower coefficients ``coeffs`` has no factor of degree <= k/2."""
    k = len(coeffs)
    f = list(coeffs) + [1]
    for d in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            g = list(low) + [1]
            r = f[:]
            for i in range(len(r) - 1, d - 1, -1):
                c = r[i]
                if c:
                    for j in range(d + 1):
                        r[i - d + j] = (r[i - d + j] - c * g[j]) % p
            if not any(r[:d]):
                return False
    return True


@lru_cache(maxsize=None)
def field_modulus(p: int, k: int) -> tuple[int, ...]:
    """Lower coefficients of the fixed defining polynomial of F_{p^k}."""
    if k == 1:
        return (0,)
    if (p, k) in CONWAY:
        return CONWAY[(p, k)]
    for low in itertools.product(range(p), repeat=k):
        cand = tuple(reversed(low))
        if cand[0] and _poly_irreducible(p, cand):
            return cand
    raise RingError(f"no irreducible polynomial for F_{p}^{k}")


def galois_field(q: int, guard: int = DEFAULT_GUARD) -> Ring:
    pk = _prime_power(q)
    if pk is None:
        raise RingError(f"F_{q}: {q} is not a prime power")
    _check_guard(q, guard, f"F_{q}")
    p, k = pk
    if k == 1:
        r = zmod(p, guard)
        return Ring(f"F_{q}", "GaloisField", {"p": p, "k": 1, "modulus": [0, 1]},
                    r.labels, r.add, r.mul, r.one, guard)
    low = field_modulus(p, k)
    digits = np.array(list(itertools.product(range(p), repeat=k)))[:, ::-1]  # digit i = coeff of x^i
    weights = p ** np.arange(k)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    prod = np.zeros((q, q, 2 * k - 1), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            prod[:, :, i + j] += digits[:, None, i] * digits[None, :, j]
    for deg in range(2 * k - 2, k - 1, -1):
        c = prod[:, :, deg] % p
        prod[:, :, deg] = 0
        for j in range(k):
            prod[:, :, deg - k + j] -= c * low[j]
    mul = (prod[:, :, :k] % p) @ weights
    labels = []
    for d in digits:
        terms = [("" if c == 1 and e else str(c)) + ("x" if e == 1 else f"x^{e}" if e else "")
                 for e, c in enumerate(d) if c]
        labels.append("+".join(reversed(terms)) or "0")
    return Ring(f"F_{q}", "GaloisField", {"p": p, "k": k, "modulus": list(low) + [1]},
                labels, add, mul, 1, guard)


def product_ring(parts: list[Ring], guard: int = DEFAULT_GUARD) -> Ring:
    if not parts:
        raise RingError("empty product")
    sizes = [r.size for r in parts]
    total = int(np.prod(sizes))
    _check_guard(total, guard, "product ring")
    tuples = np.array(list(itertools.product(*[range(s) for s in sizes])))
    strides = np.array([int(np.prod(sizes[i + 1:])) for i in range(len(sizes))])
    add = np.zeros((total, total), dtype=np.int64)
    mul = np.zeros((total, total), dtype=np.int64)
    for i, r in enumerate(parts):
        col = tuples[:, i]
        add += r.add[col[:, None], col[None, :]] * strides[i]
        mul += r.mul[col[:, None], col[None, :]] * strides[i]
    one = int(sum(r.one * s for r, s in zip(parts, strides)))
    labels = ["(" + ",".join(r.labels[x] for r, x in zip(parts, t)) + ")" for t in tuples]
    name = "prod(" + ",".join(r.name for r in parts) + ")"
    return Ring(name, "Product", {"factors": parts}, labels, add, mul, one, guard)


def upper_triangular(k: int, base: Ring, guard: int = DEFAULT_GUARD) -> Ring:
    if k < 1:
        raise RingError("UT<k> requires k >= 1")
    slots = [(i, j) for i in range(k) for j in range(i, k)]
    total = base.size ** len(slots)
    _check_guard(total, guard, f"UT{k}({base.name})")
    mats = np.array(list(itertools.product(range(base.size), repeat=len(slots))))
    pos = {s: t for t, s in enumerate(slots)}
    strides = base.size ** np.arange(len(slots) - 1, -1, -1)
    add = (base.add[mats[:, None, :], mats[None, :, :]]) @ strides
    prod = np.zeros((total, total, len(slots)), dtype=np.int64)
    for (i, j), t in pos.items():
        acc = np.zeros((total, total), dtype=np.int64)
        for l in range(i, j + 1):
            term = base.mul[mats[:, None, pos[(i, l)]], mats[None, :, pos[(l, j)]]]
            acc = base.add[acc, term]
        prod[:, :, t] = acc
    mul = prod @ strides
    one_entries = [base.one if i == j else 0 for (i, j) in slots]
    one = int(np.dot(one_entries, strides))
    labels = ["[" + ",".join(base.labels[x] for x in m) + "]" for m in mats]
    return Ring(f"UT{k}({base.name})", "UpperTriangular", {"size": k, "base": base},
                labels, add, mul, one, guard)


def opposite(ring: Ring) -> Ring:
    """The opposite ring: same elements, reversed multiplication."""
    if ring.kind == "Opposite":
        inner = ring.params["inner"]
        return inner
    return Ring(f"op({ring.name})", "Opposite", {"inner": ring}, list(ring.labels),
                ring.add, ring.mul.T, ring.one, ring.guard)


def units(ring: Ring) -> frozenset[int]:
    return ring.units()


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(Z/\d+|F_\d+|prod|UT\d+|op|\(|\)|,)")


def parse_ring(spec: str, guard: int = DEFAULT_GUARD) -> Ring:
    """Parse ``Z/N``, ``F_q``, ``prod(R,S,..)``, ``UT<k>(R)`` or ``op(R)``."""
    pos = 0
    tokens = []
    text = spec.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise RingError(f"malformed ring spec {spec!r} near {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    if not tokens:
        raise RingError("empty ring spec")

    def expr(i: int) -> tuple[Ring, int]:
        t = tokens[i]
        if t.startswith("Z/"):
            return zmod(int(t[2:]), guard), i + 1
        if t.startswith("F_"):
            return galois_field(int(t[2:]), guard), i + 1
        if t in ("prod", "op") or t.startswith("UT"):
            if i + 1 >= len(tokens) or tokens[i + 1] != "(":
                raise RingError(f"malformed ring spec {spec!r}: expected '('")
            args, j = [], i + 2
            while True:
                r, j = expr(j)
                args.append(r)
                if j >= len(tokens):
                    raise RingError(f"malformed ring spec {spec!r}: unclosed '('")
                if tokens[j] == ")":
                    j += 1
                    break
                if tokens[j] != ",":
                    raise RingError(f"malformed ring spec {spec!r}")
                j += 1
            if t == "prod":
                return product_ring(args, guard), j
            if len(args) != 1:
                raise RingError(f"{t} takes one argument")
            if t == "op":
                return opposite(args[0]), j
            return upper_triangular(int(t[2:]), args[0], guard), j
        raise RingError(f"malformed ring spec {spec!r}: unexpected {t!r}")

    try:
        ring, end = expr(0)
    except IndexError:
        raise RingError(f"malformed ring spec {spec!r}") from None
    if end != len(tokens):
        raise RingError(f"malformed ring spec {spec!r}: trailing input")
    validate_ring(ring)
    return ring


# ---------------------------------------------------------------- checks

EXHAUSTIVE_AXIOM_LIMIT = 256


def ring_axiom_failures(ring: Ring, rng_seed: int = 0) -> list[str]:
    """Names of ring axioms that fail.  Exhaustive up to 256 elements, sampled beyond."""
    n = ring.size
    A, M = ring.add, ring.mul
    if n <= EXHAUSTIVE_AXIOM_LIMIT:
        a = np.arange(n)[:, None, None]
        b = np.arange(n)[None, :, None]
        c = np.arange(n)[None, None, :]
    else:
        rng = np.random.default_rng(rng_seed)
        a, b, c = (rng.integers(0, n, 200_000) for _ in range(3))
    bad = []
    if not np.array_equal(A[A[a, b], c], A[a, A[b, c]]):
        bad.append("additive associativity")
    if not np.array_equal(A, A.T):
        bad.append("additive commutativity")
    if not np.all(A[0] == np.arange(n)):
        bad.append("additive identity")
    if not np.all((A == 0).sum(axis=1) == 1):
        bad.append("additive inverses")
    if not np.array_equal(M[M[a, b], c], M[a, M[b, c]]):
        bad.append("multiplicative associativity")
    if not (np.all(M[ring.one] == np.arange(n)) and np.all(M[:, ring.one] == np.arange(n))):
        bad.append("two-sided identity")
    if ring.one == 0:
        bad.append("0 != 1")
    if not np.array_equal(M[a, A[b, c]], A[M[a, b], M[a, c]]):
        bad.append("left distributivity")
    if not np.array_equal(M[A[a, b], c], A[M[a, c], M[b, c]]):
        bad.append("right distributivity")
    return bad


def validate_ring(ring: Ring) -> None:
    bad = ring_axiom_failures(ring)
    if bad:
        raise RingError(f"{ring.name} fails ring axioms: {', '.join(bad)}")


def check_stable_rank_one(ring: Ring) -> bool:
    """Every left-unimodular pair (a, b) has some a + c*b a unit."""
    n = ring.size
    M, A = ring.mul, ring.add
    is_unit = np.zeros(n, dtype=bool)
    is_unit[list(ring.unit_list)] = True
    for a in range(n):
        Ra = np.zeros(n, dtype=bool)
        Ra[M[:, a]] = True
        need = ring.sub[ring.one, np.nonzero(Ra)[0]]  # 1 - x*a must lie in R*b
        need_mask = np.zeros(n, dtype=bool)
        need_mask[need] = True
        Rb = M[:, :].T  # row b lists y*b over y
        unimodular = need_mask[Rb].any(axis=1)
        if not unimodular.any():
            continue
        shifted = A[a, M[:, unimodular].T]  # a + c*b for each qualifying b, all c
        if not is_unit[shifted].any(axis=1).all():
            return False
    return True


def eligible(ring: Ring) -> bool:
    return check_stable_rank_one(ring)
