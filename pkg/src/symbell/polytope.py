"""Vertices and facets of the symmetric two-body local polytope.

Vertices come from strategy counts on the boundary of the tetrahedron
``a + b + c + d = n`` (``abcd = 0``). Facets are computed with the exact
rational double-description method of cddlib; a slower brute-force dual
description (:func:`facets_bruteforce`) is kept as an independent check.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .core import (
    BellInequality,
    ConsistencyError,
    PreconditionError,
    StrategyCounts,
    SymbellError,
    SymmetricVector,
    evaluate,
    phi,
)

DIMENSION = 5
BRUTEFORCE_MAX_N = 6


class DegenerateHullError(SymbellError):
    """The vertex set does not span the expected affine dimension."""

    def __init__(self, n: int, dimension: int):
        super().__init__(f"vertices for n={n} span affine dimension {dimension}, expected {DIMENSION}")
        self.n = n
        self.dimension = dimension


def _check_n(n: int, minimum: int = 1) -> None:
    if isinstance(n, bool) or not isinstance(n, int) or n < minimum:
        raise PreconditionError(f"n must be an integer >= {minimum}, got {n!r}")


def enumerate_boundary_counts(n: int) -> list[StrategyCounts]:
    """All 4-tuples with ``a+b+c+d = n`` and ``abcd = 0``, in lexicographic order."""
    _check_n(n)
    out = []
    for a in range(n + 1):
        for b in range(n + 1 - a):
            for c in range(n + 1 - a - b):
                d = n - a - b - c
                if a * b * c * d == 0:
                    out.append(StrategyCounts(a, b, c, d))
    return out


def boundary_count(n: int) -> int:
    """Lattice count of the tetrahedron boundary: all tuples minus interior ones."""
    _check_n(n)
    return math.comb(n + 3, 3) - math.comb(n - 1, 3)


def vertices(n: int) -> list[SymmetricVector]:
    return [phi(p) for p in enumerate_boundary_counts(n)]


def vertex_matrix(n: int) -> np.ndarray:
    return np.array([v.as_tuple() for v in vertices(n)], dtype=np.int64)


def affine_dimension(points: Sequence[Sequence[int]]) -> int:
    """Exact dimension of the affine hull of integer points (-1 when empty)."""
    if not points:
        return -1
    base = points[0]
    rows = [[Fraction(x - y) for x, y in zip(p, base)] for p in points[1:]]
    return _rank(rows)


def _rank(rows: list[list[Fraction]]) -> int:
    rows = [r[:] for r in rows if any(r)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        for i in range(rank + 1, len(rows)):
            if rows[i][col]:
                f = rows[i][col] / p[col]
                rows[i] = [x - f * y for x, y in zip(rows[i], p)]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _from_halfspace(n: int, row: Sequence) -> BellInequality:
    """Convert ``b + a.x >= 0`` over (S0, S1, S00, S01, S11) to canonical form."""
    b, a0, a1, a2, a3, a4 = (Fraction(x) for x in row)
    # gamma and epsilon multiply S00/2 and S11/2.
    return BellInequality(n, a0, a1, 2 * a2, a3, 2 * a4, b).canonical()


@dataclass(frozen=True)
class FacetList:
    n: int
    facets: tuple[BellInequality, ...]
    vertex_count: int

    def __len__(self) -> int:
        return len(self.facets)

    def __iter__(self) -> Iterator[BellInequality]:
        return iter(self.facets)

    def __contains__(self, ineq: object) -> bool:
        if not isinstance(ineq, BellInequality) or ineq.n != self.n:
            return False
        return ineq.canonical() in self._as_set()

    def _as_set(self) -> frozenset:
        cached = self.__dict__.get("_set")
        if cached is None:
            cached = frozenset(self.facets)
            object.__setattr__(self, "_set", cached)
        return cached


def facets(n: int) -> FacetList:
    """Complete facet list of the symmetric polytope for ``n`` parties.

    Runs cddlib in exact rational mode on the V-representation. For n=20
    expect a few minutes.
    """
    _check_n(n, 2)
    import cdd

    verts = vertices(n)
    dim = affine_dimension([v.as_tuple() for v in verts])
    if dim != DIMENSION:
        raise DegenerateHullError(n, dim)

    mat = cdd.Matrix([[1, *v.as_tuple()] for v in verts], number_type="fraction")
    mat.rep_type = cdd.RepType.GENERATOR
    hrep = cdd.Polyhedron(mat).get_inequalities()
    if hrep.lin_set:
        raise DegenerateHullError(n, DIMENSION - len(hrep.lin_set))

    found = {_from_halfspace(n, hrep[i]) for i in range(hrep.row_size)}
    ordered = tuple(sorted(found, key=BellInequality.sort_key))
    return FacetList(n=n, facets=ordered, vertex_count=len(verts))


@dataclass(frozen=True)
class TightnessResult:
    valid: bool
    tight: bool
    saturating: tuple[StrategyCounts, ...]
    affine_dimension: int
    violating: StrategyCounts | None = None

    def __bool__(self) -> bool:
        return self.tight


def is_tight(ineq: BellInequality) -> TightnessResult:
    """Decide whether ``ineq`` is a facet of the polytope.

    An inequality violated at some vertex is reported as invalid (``valid``
    False, first violating strategy in ``violating``). The zero inequality
    saturates every vertex and is valid but not a facet.
    """
    _check_n(ineq.n, 2)
    saturating: list[StrategyCounts] = []
    for p in enumerate_boundary_counts(ineq.n):
        slack = evaluate(ineq, phi(p)) + ineq.beta_c
        if slack < 0:
            return TightnessResult(False, False, (), -1, violating=p)
        if slack == 0:
            saturating.append(p)
    dim = affine_dimension([phi(p).as_tuple() for p in saturating])
    tight = not ineq.is_zero() and dim == DIMENSION - 1
    return TightnessResult(True, tight, tuple(saturating), dim)


def _det4(m: np.ndarray) -> np.ndarray:
    """Exact determinants of a stack of 4x4 int64 matrices (Laplace over row pairs)."""
    total = np.zeros(m.shape[:-2], dtype=np.int64)
    for c1, c2 in itertools.combinations(range(4), 2):
        d1, d2 = (c for c in range(4) if c not in (c1, c2))
        top = m[..., 0, c1] * m[..., 1, c2] - m[..., 0, c2] * m[..., 1, c1]
        bottom = m[..., 2, d1] * m[..., 3, d2] - m[..., 2, d2] * m[..., 3, d1]
        sign = -1 if (1 + c1 + c2) % 2 else 1
        total += sign * top * bottom
    return total


def facets_bruteforce(n: int) -> FacetList:
    """Dual description by enumerating every hyperplane through 5 vertices.

    Keeps hyperplanes with all vertices on one side, then deduplicates.
    Integer arithmetic throughout; only practical for ``n <= 6``.
    """
    _check_n(n, 2)
    if n > BRUTEFORCE_MAX_N:
        raise PreconditionError(f"brute-force hull is limited to n <= {BRUTEFORCE_MAX_N}, got n={n}")
    V = vertex_matrix(n)
    m = len(V)
    Vf = V.astype(np.float64)
    # Cheap first pass: most candidate hyperplanes already split this subset.
    probe = Vf[:: max(1, m // 12)]
    triples = np.array(list(itertools.combinations(range(m), 3)), dtype=np.int64)
    found: set[tuple[int, ...]] = set()
    for i in range(m):
        for j in range(i + 1, m):
            rest = triples[triples[:, 0] > j]
            if len(rest) == 0:
                continue
            diffs = np.empty((len(rest), 4, DIMENSION), dtype=np.int64)
            diffs[:, 0, :] = V[j] - V[i]
            diffs[:, 1:, :] = V[rest] - V[i]
            normal = np.empty((len(rest), DIMENSION), dtype=np.int64)
            for col in range(DIMENSION):
                keep = [c for c in range(DIMENSION) if c != col]
                normal[:, col] = (-1) ** col * _det4(diffs[:, :, keep])
            nonzero = normal.any(axis=1)
            normal = normal[nonzero]
            if len(normal) == 0:
                continue
            # Values are integers far below 2**53, so the float products are exact.
            nf = normal.T.astype(np.float64)
            level = Vf[i] @ nf
            vals = probe @ nf
            keep = (vals >= level).all(axis=0) | (vals <= level).all(axis=0)
            if not keep.any():
                continue
            normal, nf, level = normal[keep], nf[:, keep], level[keep]
            vals = Vf @ nf
            above = (vals >= level).all(axis=0)
            below = (vals <= level).all(axis=0)
            hits = np.flatnonzero(above | below)
            if len(hits) == 0:
                continue
            h = np.where(above[hits, None], normal[hits], -normal[hits])
            h //= np.gcd.reduce(h, axis=1)[:, None]
            off = -(h @ V[i])
            found.update(map(tuple, np.column_stack([off, h]).tolist()))
    facet_set = {_from_halfspace(n, row) for row in found}
    ordered = tuple(sorted(facet_set, key=BellInequality.sort_key))
    return FacetList(n=n, facets=ordered, vertex_count=m)


def check_facet_list(facet_list: FacetList) -> None:
    """Raise :class:`ConsistencyError` unless every listed facet is valid and tight."""
    for f in facet_list:
        res = is_tight(f)
        if not res.tight:
            raise ConsistencyError(f"listed facet {f.as_tuple()} is not tight (valid={res.valid})")
