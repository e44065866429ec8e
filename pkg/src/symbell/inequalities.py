"""Classical bounds and the two analytic inequality families.

Bounds are computed exactly by scanning the boundary strategy counts (which
map onto the polytope vertices); :func:`classical_bound_bruteforce` scans
every per-party deterministic strategy instead and serves as its oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import (
    BellInequality,
    ConsistencyError,
    Exact,
    PreconditionError,
    StrategyCounts,
    as_exact,
    phi,
)
from .polytope import FacetList, enumerate_boundary_counts

BRUTEFORCE_MAX_N = 14
_CHUNK = 1 << 18


class ParityError(PreconditionError):
    """Class parameters fail the parity admissibility condition."""


@lru_cache(maxsize=64)
def _boundary_table(n: int) -> tuple[tuple[StrategyCounts, ...], tuple[tuple[int, ...], ...]]:
    counts = tuple(enumerate_boundary_counts(n))
    return counts, tuple(phi(p).as_tuple() for p in counts)


def _doubled_integer_coefficients(coeffs) -> tuple[tuple[int, ...], int]:
    """Integers ``k`` and a scale ``s`` with ``2*s*I = k . (S0, S1, S00, S01, S11)``."""
    a, b, g, d, e = (Fraction(as_exact(c)) for c in coeffs)
    doubled = (2 * a, 2 * b, g, 2 * d, e)
    s = math.lcm(*(x.denominator for x in doubled))
    return tuple(int(x * s) for x in doubled), s


def _exact(value: Fraction) -> Exact:
    return value.numerator if value.denominator == 1 else value


@dataclass(frozen=True)
class BoundReport:
    beta_c: Exact
    minimizers: tuple[StrategyCounts, ...]

    def to_dict(self) -> dict:
        bc = self.beta_c
        return {
            "beta_c": bc if isinstance(bc, int) else f"{bc.numerator}/{bc.denominator}",
            "minimizers": [list(p.as_tuple()) for p in self.minimizers],
        }


def classical_bound_exact(alpha, beta, gamma, delta, epsilon, n: int) -> BoundReport:
    """``-min I`` over the boundary counts, with every minimizing 4-tuple."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise PreconditionError(f"n must be an integer >= 2, got {n!r}")
    k, s = _doubled_integer_coefficients((alpha, beta, gamma, delta, epsilon))
    counts, vecs = _boundary_table(n)
    values = [k[0] * v[0] + k[1] * v[1] + k[2] * v[2] + k[3] * v[3] + k[4] * v[4] for v in vecs]
    low = min(values)
    minimizers = tuple(p for p, val in zip(counts, values) if val == low)
    return BoundReport(_exact(Fraction(-low, 2 * s)), minimizers)


def classical_bound(ineq: BellInequality) -> BoundReport:
    return classical_bound_exact(*ineq.coefficients, ineq.n)


def classical_bound_bruteforce(alpha, beta, gamma, delta, epsilon, n: int) -> Exact:
    """``-min I`` over all ``4**n`` per-party deterministic strategies."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise PreconditionError(f"n must be an integer >= 2, got {n!r}")
    if n > BRUTEFORCE_MAX_N:
        raise PreconditionError(f"brute-force bound is limited to n <= {BRUTEFORCE_MAX_N} (4**n strategies), got n={n}")
    k, s = _doubled_integer_coefficients((alpha, beta, gamma, delta, epsilon))
    if max(map(abs, k)) * 4 * n * n >= 2**62:
        raise PreconditionError("coefficients too large for the vectorized scan")
    shifts = np.arange(2 * n, dtype=np.int64)
    low = None
    total = 4**n
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        bits = (codes[:, None] >> shifts) & 1
        x = 1 - 2 * bits[:, 0::2]  # outcome of measurement 0, per party
        y = 1 - 2 * bits[:, 1::2]  # outcome of measurement 1, per party
        s0 = x.sum(axis=1)
        s1 = y.sum(axis=1)
        # Ordered pairs i != j: full double sum minus the diagonal.
        s00 = s0 * s0 - (x * x).sum(axis=1)
        s01 = s0 * s1 - (x * y).sum(axis=1)
        s11 = s1 * s1 - (y * y).sum(axis=1)
        vals = k[0] * s0 + k[1] * s1 + k[2] * s00 + k[3] * s01 + k[4] * s11
        m = int(vals.min())
        low = m if low is None else min(low, m)
    return _exact(Fraction(-low, 2 * s))


# --- three-parameter class -------------------------------------------------


@dataclass(frozen=True)
class ClassBParams:
    """Parameters of the class with ``gamma = x**2``, ``epsilon = y**2``, ``delta = sigma*x*y``.

    ``beta = mu*y`` and ``alpha = x*(sigma*mu + branch*(x + y))``.
    """

    x: int
    y: int
    sigma: int
    mu: int
    branch: int

    def __post_init__(self) -> None:
        if self.x < 1 or self.y < 1:
            raise PreconditionError(f"x and y must be positive integers, got x={self.x}, y={self.y}")
        if self.sigma not in (1, -1) or self.branch not in (1, -1):
            raise PreconditionError("sigma and branch must be +1 or -1")

    @property
    def coprime(self) -> bool:
        return math.gcd(self.x, self.y) == 1

    def parity_violation(self, n: int) -> str | None:
        """Describe the failed parity condition for ``n`` parties, or None."""
        if n % 2:
            if (self.mu - self.y * self.y) % 2 == 0:
                return f"odd n={n} needs mu={self.mu} of opposite parity to epsilon=y^2={self.y**2}"
        elif (self.mu - self.x * self.x) % 2 == 0:
            return f"even n={n} needs mu={self.mu} of opposite parity to gamma=x^2={self.x**2}"
        return None

    def admissible(self, n: int) -> bool:
        return self.parity_violation(n) is None

    def coefficients(self) -> tuple[int, int, int, int, int]:
        x, y, sg, mu, br = self.x, self.y, self.sigma, self.mu, self.branch
        return (x * (sg * mu + br * (x + y)), mu * y, x * x, sg * x * y, y * y)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "sigma": self.sigma, "mu": self.mu, "branch": self.branch}

    @classmethod
    def from_dict(cls, data: dict) -> "ClassBParams":
        return cls(int(data["x"]), int(data["y"]), int(data["sigma"]), int(data["mu"]), int(data["branch"]))


def class_b_analytic_bound(p: ClassBParams, n: int) -> Exact:
    """Closed-form bound ``[n(x+y)^2 + (sigma*mu + branch*x)^2 - 1] / 2``."""
    return _exact(Fraction(n * (p.x + p.y) ** 2 + (p.sigma * p.mu + p.branch * p.x) ** 2 - 1, 2))


@dataclass(frozen=True)
class ClassBBuild:
    inequality: BellInequality
    analytic_bound: Exact
    exact_bound: Exact

    @property
    def attained(self) -> bool:
        return self.analytic_bound == self.exact_bound


def class_b_report(p: ClassBParams, n: int) -> ClassBBuild:
    """Build the class member and compare the closed-form bound to the exact one.

    The closed form is always a valid bound; it is not always attained on the
    boundary, in which case the exact bound is smaller.
    """
    reason = p.parity_violation(n)
    if reason:
        raise ParityError(reason)
    coeffs = p.coefficients()
    exact = classical_bound_exact(*coeffs, n).beta_c
    analytic = class_b_analytic_bound(p, n)
    if exact > analytic:
        raise ConsistencyError(f"{p} at n={n}: exact bound {exact} exceeds closed form {analytic}")
    return ClassBBuild(BellInequality(n, *coeffs, exact), analytic, exact)


def class_b_build(p: ClassBParams, n: int, *, strict: bool = False) -> BellInequality:
    """Class member for ``n`` parties, carrying its exact classical bound.

    With ``strict=True`` a closed-form bound that is not attained raises
    :class:`ConsistencyError`.
    """
    built = class_b_report(p, n)
    if strict and not built.attained:
        raise ConsistencyError(
            f"{p} at n={n}: closed-form bound {built.analytic_bound} != exact bound {built.exact_bound}"
        )
    return built.inequality


def class_b_square_bound_failures(p: ClassBParams, n: int) -> list[StrategyCounts]:
    """Boundary points where ``(x S0 + sigma y S1 + sigma mu + branch x)^2 + 8 x y r >= 1`` fails.

    ``r`` is the strategy count selected by (branch, sigma): b, a, c, d for
    (+,+), (+,-), (-,+), (-,-).
    """
    pick = {(1, 1): 1, (1, -1): 0, (-1, 1): 2, (-1, -1): 3}[(p.branch, p.sigma)]
    bad = []
    for counts in enumerate_boundary_counts(n):
        v = phi(counts)
        r = counts.as_tuple()[pick]
        lhs = (p.x * v.s0 + p.sigma * p.y * v.s1 + p.sigma * p.mu + p.branch * p.x) ** 2 + 8 * p.x * p.y * r
        if lhs < 1:
            bad.append(counts)
    return bad


def _isqrt_exact(v: int) -> int | None:
    if v < 0:
        return None
    r = math.isqrt(v)
    return r if r * r == v else None


def invert_class_b(ineq: BellInequality) -> list[ClassBParams]:
    """Admissible class parameters whose member is a positive multiple of ``ineq``.

    The closed-form bound is part of the match. With ``t = gcd(gamma, epsilon)``
    the member is ``(k**2 / t)`` times the given coefficients for an integer
    ``k``; the bound equation fixes ``k`` uniquely per branch.
    """
    f = ineq.canonical()
    al, be, ga, de, ep, bc = f.as_tuple()
    n = f.n
    if ga <= 0 or ep <= 0 or de == 0:
        return []
    t = math.gcd(ga, ep)
    xp, yp = _isqrt_exact(ga // t), _isqrt_exact(ep // t)
    if xp is None or yp is None:
        return []
    if abs(de) != t * xp * yp:
        return []
    sigma = 1 if de > 0 else -1
    out = []
    for branch in (1, -1):
        # (sigma*mu + branch*x) = k*w once the member is scaled back up.
        w = Fraction(al, t * xp) - branch * yp
        q = Fraction(2 * bc, t) - n * (xp + yp) ** 2 - w * w
        if q >= 0:
            continue
        k2 = -1 / q
        if k2.denominator != 1 or int(k2) % t:
            continue
        k = _isqrt_exact(int(k2))
        if k is None:
            continue
        g = int(k2) // t
        x, y = k * xp, k * yp
        if (g * be) % y:
            continue
        p = ClassBParams(x, y, sigma, g * be // y, branch)
        if not p.admissible(n):
            continue
        member = BellInequality(n, *p.coefficients(), class_b_analytic_bound(p, n))
        if member.canonical() == f:
            out.append(p)
    return out


@dataclass(frozen=True)
class ClassBMatch:
    n: int
    count: int
    matched: tuple[tuple[BellInequality, tuple[ClassBParams, ...]], ...]
    convention: str = (
        "a facet is counted once if some admissible (x, y, sigma, mu, branch) reproduces it "
        "up to positive scaling, closed-form bound included; both sigma and both branches are searched"
    )


def classify_facets_as_class_b(facet_list: FacetList) -> ClassBMatch:
    matched = []
    for f in facet_list:
        params = invert_class_b(f)
        if params:
            matched.append((f, tuple(params)))
    return ClassBMatch(facet_list.n, len(matched), tuple(matched))


def elementary_inequality(n: int) -> BellInequality:
    """Class member with ``x = y = 1``, ``sigma = -1``, ``mu = 0``, lower branch.

    Coefficients ``(-2, 0, 1, -1, 1)`` and bound ``2n``; a facet for ``n >= 4``.
    """
    if n < 2:
        raise PreconditionError(f"n must be an integer >= 2, got {n!r}")
    return BellInequality(n, -2, 0, 1, -1, 1, 2 * n)


# --- Dicke-state family ----------------------------------------------------


def dicke_coefficients(n: int) -> tuple[Exact, Exact, Exact, Exact, Exact]:
    """``(alpha, beta, gamma, delta, epsilon)`` of the family violated by half-filled Dicke states."""
    if n < 2:
        raise PreconditionError(f"the Dicke family needs n >= 2, got n={n}")
    half = Fraction(n, 2)
    alpha = n * (n - 1) * (math.ceil(half) - half)
    return tuple(
        _exact(Fraction(c)) for c in (alpha, alpha / n, Fraction(n * (n - 1), 2), half, -1)
    )  # type: ignore[return-value]


def dicke_bound(n: int) -> int:
    """``n(n-1) ceil((n+2)/2) / 2``."""
    if n < 2:
        raise PreconditionError(f"the Dicke family needs n >= 2, got n={n}")
    return n * (n - 1) * ((n + 3) // 2) // 2


def dicke_bound_piecewise(n: int) -> int:
    """Same bound from the separate even/odd minimization: ``n(n-1)(n+2)/4`` or ``n(n-1)(n+3)/4``."""
    if n < 2:
        raise PreconditionError(f"the Dicke family needs n >= 2, got n={n}")
    return n * (n - 1) * (n + 2 if n % 2 == 0 else n + 3) // 4


def dicke_build(n: int) -> BellInequality:
    """Dicke-family inequality in its natural normalization.

    For odd ``n`` the ``S01`` coefficient is ``n/2`` and stays a Fraction;
    ``dicke_build(n).canonical()`` is the integer form (scaled by 2).
    """
    coeffs = dicke_coefficients(n)
    bound = dicke_bound(n)
    exact = classical_bound_exact(*coeffs, n).beta_c
    if exact != bound:
        raise ConsistencyError(f"Dicke family n={n}: closed-form bound {bound} != exact bound {exact}")
    return BellInequality(n, *coeffs, bound)


def dicke_saturating_counts(n: int) -> tuple[StrategyCounts, ...]:
    """The five boundary 4-tuples where the Dicke-family inequality is tight."""
    if n < 2:
        raise PreconditionError(f"the Dicke family needs n >= 2, got n={n}")
    if n % 2 == 0:
        h = n // 2
        tuples = [(0, h, 0, h), (0, h + 1, 0, h - 1), (h - 1, 0, h + 1, 0), (h, 0, h, 0), (h, 0, 0, h)]
    else:
        lo, hi = (n - 1) // 2, (n + 1) // 2
        tuples = [(0, hi, 0, lo), (0, lo, 0, hi), (lo, 0, hi, 0), ((n - 3) // 2, 0, (n + 3) // 2, 0), (lo, 0, 0, hi)]
    return tuple(StrategyCounts(*t) for t in tuples if min(t) >= 0)
