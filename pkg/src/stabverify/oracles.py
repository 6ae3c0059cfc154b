"""Independent dense reference computations used to cross-check the sparse engine.

Nothing here touches the builders or the sparse elimination: subspaces come from
brute-force closure, chains from recursion, and invariants from a textbook Smith
reduction over Python integers.
"""

from __future__ import annotations

import itertools
from typing import Sequence

from .rings import Ring


def _vec_add(ring: Ring, a: tuple, b: tuple) -> tuple:
    return tuple(int(ring.add[x, y]) for x, y in zip(a, b))


def _scale(ring: Ring, r: int, a: tuple) -> tuple:
    return tuple(int(ring.mul[r, x]) for x in a)


def subspaces(ring: Ring, n: int) -> list[frozenset]:
    """Every nonzero proper subspace of ``F^n`` by closing spans of vector sets."""
    if not ring.is_field:
        raise ValueError("the dense oracle handles fields only")
    zero = (0,) * n
    vectors = [v for v in itertools.product(range(ring.size), repeat=n) if v != zero]

    def close(gens: Sequence[tuple]) -> frozenset:
        span = {zero}
        for g in gens:
            span = {_vec_add(ring, s, _scale(ring, r, g)) for s in span for r in range(ring.size)}
        return frozenset(span)

    found = set()
    frontier = {close([v]) for v in vectors}
    full = ring.size ** n
    while frontier:
        found |= frontier
        nxt = set()
        for s in frontier:
            for v in vectors:
                if v not in s:
                    t = close(_basis(ring, s, n) + [v])
                    if len(t) < full and t not in found:
                        nxt.add(t)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _basis(ring: Ring, s: frozenset, n: int) -> list[tuple]:
    basis: list[tuple] = []
    span = {(0,) * n}
    for v in sorted(s):
        if v not in span:
            basis.append(v)
            span = {_vec_add(ring, a, _scale(ring, r, v)) for a in span for r in range(ring.size)}
    return basis


def chains(elements: Sequence[frozenset]) -> dict[int, list[tuple[int, ...]]]:
    """All chains of strict inclusions, indexed by simplex dimension, as increasing index tuples."""
    up = {i: [j for j in range(len(elements)) if elements[i] < elements[j]] for i in range(len(elements))}
    out: dict[int, list[tuple[int, ...]]] = {}

    def walk(chain: tuple[int, ...]) -> None:
        out.setdefault(len(chain) - 1, []).append(chain)
        for j in up[chain[-1]]:
            walk(chain + (j,))

    for i in range(len(elements)):
        walk((i,))
    for k in out:
        out[k] = sorted(tuple(sorted(c)) for c in out[k])
    return out


def dense_boundary(faces: list[tuple[int, ...]], cofaces: list[tuple[int, ...]]) -> list[list[int]]:
    where = {f: i for i, f in enumerate(faces)}
    mat = [[0] * len(cofaces) for _ in faces]
    for j, s in enumerate(cofaces):
        for i in range(len(s)):
            mat[where[s[:i] + s[i + 1:]]][j] += -1 if i % 2 else 1
    return mat


def smith_diagonal(mat: list[list[int]]) -> list[int]:
    """Nonzero invariant factors by repeated minimal-pivot row and column reduction."""
    a = [list(r) for r in mat]
    rows, cols = len(a), len(a[0]) if a else 0
    diag = []
    t = 0
    while t < min(rows, cols):
        entries = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not entries:
            break
        _, pi, pj = min(entries)
        a[t], a[pi] = a[pi], a[t]
        for r in a:
            r[t], r[pj] = r[pj], r[t]
        done = False
        while not done:
            done = True
            p = a[t][t]
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // p
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // p
                    for r in a:
                        r[j] -= q * r[t]
                    if a[t][j]:
                        done = False
            if not done:
                entries = [(abs(a[i][t]), i, t) for i in range(t, rows) if a[i][t]]
                entries += [(abs(a[t][j]), t, j) for j in range(t, cols) if a[t][j]]
                _, pi, pj = min(entries)
                a[t], a[pi] = a[pi], a[t]
                for r in a:
                    r[t], r[pj] = r[pj], r[t]
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % p), None)
            if bad is not None:
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                done = False
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def tits_reduced_homology(ring: Ring, n: int) -> tuple[int, list[int]]:
    """Rank and torsion of the top reduced homology of the Tits complex of ``F^n``, densely."""
    elems = subspaces(ring, n)
    ch = chains(elems)
    d = n - 2
    top = ch.get(d, [])
    below = ch.get(d - 1, []) if d >= 1 else [()]
    if d >= 1:
        down = dense_boundary(below, top)
    else:
        down = [[1] * len(top)]
    rank_down = len(smith_diagonal(down)) if top else 0
    above = ch.get(d + 1, [])
    up = smith_diagonal(dense_boundary(top, above)) if above else []
    torsion = sorted(x for x in up if x > 1)
    return len(top) - rank_down - len(up), torsion

