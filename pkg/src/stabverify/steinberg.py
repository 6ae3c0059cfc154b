"""Steinberg, relative Steinberg and Charney modules, apartment classes and generation checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .builders import build_basis_complex, build_splitting, build_tits
from .complexes import Poset, SimplicialComplex
from .groups import (
    FiniteMatrixGroup,
    GModule,
    action_on_homology,
    coinvariants,
    enumerate_gl,
    gl_relative,
    mat_compose,
    stabilizer_subgroup,
)
from .homology import (
    HomologyResult,
    SparseIntMatrix,
    boundary_matrix,
    eliminate,
    invert_two_vanishes,
    verify_spherical,
)
from .linalg import LinalgError, Matrix, Submodule, free_module, is_free_summand, mat_inverse, mat_mul, unit_vector
from .rings import Ring

SYMBOL_GUARD = 200_000


class SteinbergError(ValueError):
    pass


@dataclass
class SteinbergLikeModule:
    """A homology module of a poset together with the group acting on it."""

    kind: str
    ring: Ring
    n: int
    m: int
    degree: int
    poset: Poset
    complex: SimplicialComplex
    group: FiniteMatrixGroup
    module: GModule
    spherical: object = None
    W: Submodule | None = None

    @property
    def rank(self) -> int:
        return self.module.rank

    @property
    def name(self) -> str:
        if self.kind == "St":
            return f"St_{self.n}({self.ring.name})" if self.m == 0 else f"St_{self.n}^{self.m}({self.ring.name})"
        if self.W is not None:
            return f"Ch({self.ring.name}^{self.n}, W)"
        return f"Ch_{self.n}({self.ring.name})"

    def summary(self) -> dict:
        return {"module": self.name, "degree": self.degree, "rank": self.rank,
                "group": self.group.name, "group_order": self.group.order,
                "spherical_proxy": bool(getattr(self.spherical, "ok", False))}


def _ambient_index(poset: Poset) -> dict[frozenset, int]:
    return {e.codes: i for i, e in enumerate(poset.elements)}


def steinberg_module(ring: Ring, n: int, m: int = 0, group: FiniteMatrixGroup | None = None) -> SteinbergLikeModule:
    """``H~_{n-2}`` of the Tits complex (``m = 0``) or ``H~_{n-1}`` of its relative version."""
    if m == 0 and n < 2:
        raise SteinbergError("absolute Steinberg modules need n >= 2")
    if m < 0 or n < 1:
        raise SteinbergError("need n >= 1 and m >= 0")
    poset = build_tits(ring, n, m)
    x = poset.order_complex()
    degree = n - 2 if m == 0 else n - 1
    if group is None:
        group = enumerate_gl(ring, n) if m == 0 else gl_relative(ring, n, m)
    module = action_on_homology(group, x, degree)
    return SteinbergLikeModule("St", ring, n, m, degree, poset, x, group, module, verify_spherical(x, degree))


def charney_module(ring: Ring, n: int, W: Submodule | None = None,
                   group: FiniteMatrixGroup | None = None) -> SteinbergLikeModule:
    """Top homology of the splitting poset, absolute or with ``W`` inside the second factor."""
    if W is None:
        if n < 2:
            raise SteinbergError("Charney modules need n >= 2")
        poset = build_splitting(ring, n)
        degree = n - 2
        if group is None:
            group = enumerate_gl(ring, n)
    else:
        k = is_free_summand(W)
        if k is None or k <= 0 or k >= n:
            raise SteinbergError("W must be a nonzero proper free summand")
        poset = build_splitting(ring, n, W=W)
        degree = n - k - 1
        if group is None:
            group = stabilizer_subgroup(enumerate_gl(ring, n), fix=list(W.witness),
                                        name=f"GL({ring.name}^{n}, fix W)")
    x = poset.order_complex()
    module = action_on_homology(group, x, degree)
    return SteinbergLikeModule("Ch", ring, n, 0, degree, poset, x, group, module, verify_spherical(x, degree), W)


# ---------------------------------------------------------------- chains and classes


def chain_class(x: SimplicialComplex, chains: Sequence[tuple[Sequence[int], int]]) -> dict[int, int]:
    """Sum of ordered simplices with coefficients, converted to sorted-vertex orientation."""
    if not chains:
        return {}
    k = len(chains[0][0]) - 1
    rows = np.array([list(c) for c, _ in chains], dtype=np.int64)
    order = np.argsort(rows, axis=1, kind="stable")
    srt = np.take_along_axis(rows, order, axis=1)
    idx = x.index_of(k, srt)
    if (idx < 0).any():
        raise SteinbergError("a chain of the class is not a simplex of the complex")
    inv = np.zeros(len(rows), dtype=np.int64)
    for i in range(k + 1):
        for j in range(i + 1, k + 1):
            inv += order[:, i] > order[:, j]
    out: dict[int, int] = {}
    for t, s, (_, coef) in zip(idx.tolist(), inv.tolist(), chains):
        v = coef if s % 2 == 0 else -coef
        out[t] = out.get(t, 0) + v
    return {t: v for t, v in out.items() if v}


def is_cycle(x: SimplicialComplex, k: int, chain: dict[int, int]) -> bool:
    D = boundary_matrix(x, k)
    acc: dict[int, int] = {}
    sel = np.isin(D.cols, np.fromiter(chain, dtype=np.int64))
    for r, c, v in zip(D.rows[sel].tolist(), D.cols[sel].tolist(), D.vals[sel].tolist()):
        acc[r] = acc.get(r, 0) + v * chain[c]
    return not any(acc.values())


def _perm_sign(p: Sequence[int]) -> int:
    inv = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
    return -1 if inv % 2 else 1


def _span_vertex(ring: Ring, N: int, vectors: Sequence[Sequence[int]], where: dict) -> int:
    codes = frozenset(int(c) for c in free_module(ring, N).span_codes(vectors))
    if codes not in where:
        raise SteinbergError("span is not an element of the poset")
    return where[codes]


@dataclass(frozen=True)
class ApartmentSymbol:
    """Absolute symbol (``matrix``) or relative symbol (``vectors``, ``coefficients``, ``targets``).

    Relative targets index ``e_1 .. e_m, v_1 .. v_{i-1}``: values ``< m`` are unit
    vectors, value ``m + k`` is ``v_{k+1}``.
    """

    matrix: Matrix | None = None
    vectors: tuple[tuple[int, ...], ...] = ()
    coefficients: tuple[int, ...] = ()
    targets: tuple[int, ...] = ()
    m: int = 0

    @property
    def relative(self) -> bool:
        return self.matrix is None

    def target_vector(self, ring: Ring, i: int) -> tuple[int, ...]:
        b = self.targets[i]
        N = len(self.vectors[i])
        return unit_vector(ring, N, b) if b < self.m else self.vectors[b - self.m]

    def pairs(self, ring: Ring) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        out = []
        for i, v in enumerate(self.vectors):
            e = self.target_vector(ring, i)
            r = self.coefficients[i]
            out.append((v, tuple(int(ring.add[a, ring.mul[r, b]]) for a, b in zip(v, e))))
        return out

    def act(self, ring: Ring, phi: Matrix) -> "ApartmentSymbol":
        """Right action: every vector ``v`` becomes ``v . phi``."""
        if not self.relative:
            return ApartmentSymbol(matrix=mat_mul(ring, self.matrix, phi))
        vs = tuple(tuple(mat_mul(ring, (v,), phi)[0]) for v in self.vectors)
        return ApartmentSymbol(None, vs, self.coefficients, self.targets, self.m)

    def __str__(self) -> str:
        if not self.relative:
            return "[" + "; ".join(" ".join(map(str, r)) for r in self.matrix) + "]"
        parts = []
        for i, v in enumerate(self.vectors):
            b = self.targets[i]
            tgt = f"e{b + 1}" if b < self.m else f"v{b - self.m + 1}"
            parts.append(f"[{v}, {v}+{self.coefficients[i]}*{tgt}]")
        return " * ".join(parts) if parts else "[]"


def apartment_chain(st: SteinbergLikeModule, M: Matrix) -> dict[int, int]:
    """Pushforward of the boundary-of-simplex fundamental class along ``S -> <rows of M in S>``."""
    ring, n = st.ring, st.n
    try:
        mat_inverse(ring, M)
    except LinalgError as exc:
        raise SteinbergError("apartment matrix is singular") from exc
    where = _ambient_index(st.poset)
    vertex: dict[frozenset, int] = {}
    chains = []
    for perm in itertools.permutations(range(n)):
        ids = []
        for k in range(1, n):
            key = frozenset(perm[:k])
            if key not in vertex:
                vertex[key] = _span_vertex(ring, n, [M[i] for i in sorted(key)], where)
            ids.append(vertex[key])
        chains.append((ids, _perm_sign(perm)))
    return chain_class(st.complex, chains)


def relative_apartment_chain(st: SteinbergLikeModule, theta: ApartmentSymbol) -> dict[int, int]:
    """Pushforward of the cross-polytope fundamental class along the join of the symbol's 0-spheres."""
    ring, n, m = st.ring, st.n, st.m
    if len(theta.vectors) != n:
        raise SteinbergError("symbol must have length n")
    N = n + m
    where = _ambient_index(st.poset)
    pairs = theta.pairs(ring)
    vertex: dict[tuple, int] = {}
    chains = []
    for perm in itertools.permutations(range(n)):
        s = _perm_sign(perm)
        for eps in itertools.product((0, 1), repeat=n):
            ids = []
            for k in range(1, n + 1):
                key = tuple(sorted((i, eps[i]) for i in perm[:k]))
                if key not in vertex:
                    vertex[key] = _span_vertex(ring, N, [pairs[i][e] for i, e in key], where)
                ids.append(vertex[key])
            chains.append((ids, -s if sum(eps) % 2 else s))
    return chain_class(st.complex, chains)


def _to_coords(st: SteinbergLikeModule, chain: dict[int, int]) -> list[int]:
    b = st.module.basis
    coords = b.coordinates(chain)
    out = [0] * b.rank
    for j, v in coords.items():
        out[j] = v
    return out


def apartment_class(st: SteinbergLikeModule, M: Matrix) -> list[int]:
    """Coordinates of the apartment class of ``M`` in the stored cycle basis."""
    chain = apartment_chain(st, M)
    if not is_cycle(st.complex, st.degree, chain):
        raise SteinbergError("apartment chain is not a cycle")
    return _to_coords(st, chain)


def relative_apartment_class(st: SteinbergLikeModule, theta: ApartmentSymbol) -> list[int]:
    chain = relative_apartment_chain(st, theta)
    if not is_cycle(st.complex, st.degree, chain):
        raise SteinbergError("symbol chain is not a cycle")
    return _to_coords(st, chain)


def enumerate_symbols(ring: Ring, n: int, m: int, j: int | None = None,
                      guard: int = SYMBOL_GUARD) -> list[ApartmentSymbol]:
    """All relative symbols of length ``j`` (default ``n``) in lexicographic order."""
    if m < 1 or n < 1:
        raise SteinbergError("relative symbols need m, n >= 1")
    j = n if j is None else j
    if not 0 <= j <= n:
        raise SteinbergError("need 0 <= j <= n")
    if j == 0:
        return [ApartmentSymbol(m=m)]
    link = build_basis_complex(ring, n, m, method="B")
    simplices = link.simplices[j - 1] if j - 1 <= link.dim else np.zeros((0, j), np.int64)
    ordered = []
    for row in simplices.tolist():
        for perm in itertools.permutations(row):
            ordered.append(tuple(tuple(link.payloads[v]) for v in perm))
    ordered.sort()
    nonzero = sorted(ring.nonzero())
    count = len(ordered) * (len(nonzero) ** j) * np.prod([m + i for i in range(j)], dtype=object)
    if count > guard:
        raise SteinbergError(f"{count} symbols exceed the guard {guard}")
    out = []
    for vs in ordered:
        for rs in itertools.product(nonzero, repeat=j):
            for ts in itertools.product(*[range(m + i) for i in range(j)]):
                out.append(ApartmentSymbol(None, vs, tuple(rs), tuple(ts), m))
    return out


def sign_flip_element(ring: Ring, theta: ApartmentSymbol) -> Matrix:
    """The element fixing ``e_i`` and ``v_1 .. v_{n-1}`` and sending ``v_n`` to ``-v_n - a e_beta``."""
    m, n = theta.m, len(theta.vectors)
    N = m + n
    B = tuple(unit_vector(ring, N, i) for i in range(m)) + tuple(theta.vectors)
    try:
        Binv = mat_inverse(ring, B)
    except LinalgError as exc:
        raise SteinbergError("symbol vectors do not complete e_1..e_m to a basis") from exc
    D = [list(unit_vector(ring, N, i)) for i in range(N)]
    last = [0] * N
    last[N - 1] = int(ring.neg[ring.one])
    b = theta.targets[-1]
    last[b] = int(ring.add[last[b], ring.neg[theta.coefficients[-1]]])
    D[N - 1] = last
    return mat_mul(ring, mat_mul(ring, Binv, tuple(tuple(r) for r in D)), B)


# ---------------------------------------------------------------- lattice checks


@dataclass
class SpanReport:
    ok: bool
    generators: int
    rank: int
    span_rank: int
    divisors: list[int]
    equivariance_checks: int = 0
    equivariance_failures: int = 0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"ok": self.ok, "generators": self.generators, "module_rank": self.rank,
                "span_rank": self.span_rank, "divisors": self.divisors,
                "cokernel": HomologyResult(self.rank - self.span_rank,
                                           tuple(d for d in self.divisors if d != 1)).to_json(),
                "equivariance_checks": self.equivariance_checks,
                "equivariance_failures": self.equivariance_failures, **self.details}


def lattice_span(rank: int, vectors: Sequence[Sequence[int]]) -> tuple[int, list[int]]:
    """Rank and nontrivial elementary divisors of the sublattice spanned by ``vectors``."""
    cols = [{i: v for i, v in enumerate(vec) if v} for vec in vectors]
    cols = [c for c in cols if c]
    if not cols or rank == 0:
        return 0, []
    e = eliminate(SparseIntMatrix.from_columns(rank, cols))
    return e.rank, list(e.divisors)


def _equivariance(st: SteinbergLikeModule, symbols: Sequence, classes: Sequence[list[int]],
                  class_of, samples: int, seed: int) -> tuple[int, int]:
    rng = np.random.default_rng(seed)
    group = st.group
    checks = failures = 0
    if not symbols or not group.elements:
        return 0, 0
    for _ in range(samples):
        s = int(rng.integers(len(symbols)))
        g = group.elements[int(rng.integers(group.order))]
        left = class_of(st, symbols[s].act(st.ring, g) if isinstance(symbols[s], ApartmentSymbol)
                        else mat_mul(st.ring, symbols[s], g))
        right = mat_compose([classes[s]], st.module.matrix(g))[0]
        checks += 1
        failures += left != right
    return checks, failures


def verify_apartments_generate(ring: Ring, n: int, st: SteinbergLikeModule | None = None,
                               samples: int = 20, seed: int = 0) -> SpanReport:
    """The apartment classes of all of ``GL_n(R)`` span the Steinberg lattice."""
    st = st or steinberg_module(ring, n)
    mats = st.group.elements
    classes = [apartment_class(st, M) for M in mats]
    span_rank, divisors = lattice_span(st.rank, classes)
    checks, fails = _equivariance(st, mats, classes, apartment_class, samples, seed)
    ok = span_rank == st.rank and all(d == 1 for d in divisors) and fails == 0
    return SpanReport(ok, len(mats), st.rank, span_rank, [d for d in divisors if d != 1], checks, fails)


def verify_relative_generate(ring: Ring, n: int, m: int, st: SteinbergLikeModule | None = None,
                             samples: int = 20, seed: int = 0) -> SpanReport:
    """The classes of all relative symbols span the relative Steinberg lattice."""
    st = st or steinberg_module(ring, n, m)
    symbols = enumerate_symbols(ring, n, m)
    classes = [relative_apartment_class(st, t) for t in symbols]
    span_rank, divisors = lattice_span(st.rank, classes)
    checks, fails = _equivariance(st, symbols, classes, relative_apartment_class, samples, seed)
    flips = 0
    for t, c in zip(symbols[: max(1, samples)], classes):
        phi = sign_flip_element(ring, t)
        if phi not in st.group or relative_apartment_class(st, t.act(ring, phi)) != [-x for x in c]:
            flips += 1
    ok = span_rank == st.rank and all(d == 1 for d in divisors) and fails == 0 and flips == 0
    return SpanReport(ok, len(symbols), st.rank, span_rank, [d for d in divisors if d != 1], checks, fails,
                      {"sign_flip_failures": flips})


@dataclass
class CoinvariantReport:
    module: str
    coinvariants: HomologyResult
    vanishes_with_two_inverted: bool
    acting_elements: int

    @property
    def ok(self) -> bool:
        return self.vanishes_with_two_inverted

    def to_json(self) -> dict:
        return {"module": self.module, "coinvariants": self.coinvariants.to_json(),
                "vanishes_with_two_inverted": self.vanishes_with_two_inverted,
                "acting_elements": self.acting_elements}


def verify_coinvariants_vanish(st: SteinbergLikeModule) -> CoinvariantReport:
    co = coinvariants(st.module)
    return CoinvariantReport(st.name, co, invert_two_vanishes(co), len(st.module.action))


def dual_class_divisors(ring: Ring, n: int) -> tuple[tuple[int, list[int]], tuple[int, list[int]]]:
    """Span data of apartment classes over ``R`` and over ``R^op`` (via inverse transposes)."""
    from .linalg import inverse_transpose
    from .rings import opposite

    st = steinberg_module(ring, n)
    op = opposite(ring)
    st_op = steinberg_module(op, n)
    mats = st.group.elements
    a = lattice_span(st.rank, [apartment_class(st, M) for M in mats])
    b = lattice_span(st_op.rank, [apartment_class(st_op, inverse_transpose(ring, M)) for M in mats])
    return a, b

