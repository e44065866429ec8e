"""Shared domain types and the exact strategy-count map.

Everything in this module is exact: counts and correlator sums are Python
integers, and inequality coefficients are integers or ``fractions.Fraction``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, Union

Exact = Union[int, Fraction]

SCHEMA = "symbell/1"
# Largest integer a JSON consumer using IEEE doubles can hold exactly.
_JSON_SAFE_INT = 2**53


class SymbellError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(SymbellError, ValueError):
    """An argument violates the documented precondition of an operation."""


class ConsistencyError(SymbellError, RuntimeError):
    """Two independent computations that must agree did not."""


def as_exact(value: Any) -> Exact:
    """Coerce ints, Fractions and rational strings (``"7/2"``) to an exact number.

    Floats are refused: a float coefficient has already been rounded.
    """
    if isinstance(value, bool):
        raise PreconditionError("booleans are not coefficients")
    if isinstance(value, int):
        return value
    if isinstance(value, Rational):
        f = Fraction(value)
        return f.numerator if f.denominator == 1 else f
    if isinstance(value, str):
        f = Fraction(value.strip())
        return f.numerator if f.denominator == 1 else f
    raise PreconditionError(f"expected an exact rational, got {type(value).__name__}: {value!r}")


def _normalize(value: Fraction) -> Exact:
    return value.numerator if value.denominator == 1 else value


def _json_number(value: Exact) -> int | str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if abs(value) >= _JSON_SAFE_INT:
        return str(value)
    return value


@dataclass(frozen=True)
class StrategyCounts:
    """Numbers of parties using each deterministic local strategy.

    ``a``, ``b``, ``c``, ``d`` count parties whose outcome pair for
    (measurement 0, measurement 1) is (+1,+1), (+1,-1), (-1,+1), (-1,-1).
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise PreconditionError(f"strategy count {f.name}={v!r} must be a non-negative integer")

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d

    def on_boundary(self) -> bool:
        return self.a * self.b * self.c * self.d == 0

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class SymmetricVector:
    """Symmetrized one- and two-body correlator sums for ``n`` parties."""

    s0: int
    s1: int
    s00: int
    s01: int
    s11: int
    n: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.s0, self.s1, self.s00, self.s01, self.s11)

    def check_ranges(self) -> list[str]:
        """Return the list of violated range constraints (empty when all hold)."""
        n, bad = self.n, []
        if not -n <= self.s0 <= n:
            bad.append("s0")
        if not -n <= self.s1 <= n:
            bad.append("s1")
        top = n * (n - 1)
        if not -n <= self.s00 <= top:
            bad.append("s00")
        if not -n <= self.s11 <= top:
            bad.append("s11")
        if abs(self.s01) > top:
            bad.append("s01")
        return bad

    def to_dict(self) -> dict[str, int | str]:
        return {k: _json_number(v) for k, v in zip(("s0", "s1", "s00", "s01", "s11"), self.as_tuple())}

    @classmethod
    def from_dict(cls, data: dict[str, Any], n: int) -> "SymmetricVector":
        return cls(*(int(data[k]) for k in ("s0", "s1", "s00", "s01", "s11")), n=n)


@dataclass(frozen=True)
class BellInequality:
    """Symmetric two-body Bell inequality ``I + beta_c >= 0`` with

    ``I = alpha*S0 + beta*S1 + gamma/2*S00 + delta*S01 + epsilon/2*S11``.

    Coefficients are exact. Hull facets are stored in canonical form (integers,
    gcd 1); analytic families may carry rational coefficients, and
    :meth:`canonical` returns their integer representative.
    """

    n: int
    alpha: Exact
    beta: Exact
    gamma: Exact
    delta: Exact
    epsilon: Exact
    beta_c: Exact

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise PreconditionError(f"n must be a positive integer, got {self.n!r}")
        for name in ("alpha", "beta", "gamma", "delta", "epsilon", "beta_c"):
            object.__setattr__(self, name, as_exact(getattr(self, name)))

    @property
    def coefficients(self) -> tuple[Exact, Exact, Exact, Exact, Exact]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.epsilon)

    def as_tuple(self) -> tuple[Exact, ...]:
        return (*self.coefficients, self.beta_c)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def evaluate(self, v: SymmetricVector) -> Exact:
        return evaluate(self, v)

    def canonical(self) -> "BellInequality":
        """Integer representative with gcd 1; positive scaling keeps the orientation."""
        values = [Fraction(x) for x in self.as_tuple()]
        scale = math.lcm(*(x.denominator for x in values))
        ints = [int(x * scale) for x in values]
        g = math.gcd(*ints)
        if g > 1:
            ints = [x // g for x in ints]
        return BellInequality(self.n, *ints)

    def is_canonical(self) -> bool:
        return all(isinstance(x, int) for x in self.as_tuple()) and math.gcd(*self.as_tuple()) in (0, 1)

    def sort_key(self) -> tuple:
        return tuple(Fraction(x) for x in self.as_tuple())

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"n": self.n}
        for name in ("alpha", "beta", "gamma", "delta", "epsilon", "beta_c"):
            out[name] = _json_number(getattr(self, name))
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BellInequality":
        return cls(int(data["n"]), *(data[k] for k in ("alpha", "beta", "gamma", "delta", "epsilon", "beta_c")))


def phi(counts: StrategyCounts, n: int | None = None) -> SymmetricVector:
    """Map strategy counts to the symmetrized correlator vector."""
    if n is not None and counts.n != n:
        raise PreconditionError(f"counts {counts.as_tuple()} sum to {counts.n}, expected n={n}")
    if counts.n < 1:
        raise PreconditionError("at least one party is required")
    a, b, c, d = counts.as_tuple()
    m = counts.n
    s0 = a + b - c - d
    s1 = a - b + c - d
    return SymmetricVector(s0, s1, s0 * s0 - m, s0 * s1 - (a - b - c + d), s1 * s1 - m, m)


def evaluate(ineq: BellInequality, v: SymmetricVector) -> Exact:
    """Bell expression ``I`` (without the bound) at a correlator vector."""
    if ineq.n != v.n:
        raise PreconditionError(f"inequality is for n={ineq.n} but vector is for n={v.n}")
    total = (
        ineq.alpha * v.s0
        + ineq.beta * v.s1
        + Fraction(ineq.gamma) * v.s00 / 2
        + ineq.delta * v.s01
        + Fraction(ineq.epsilon) * v.s11 / 2
    )
    return _normalize(Fraction(total))


def symmetrize_strategies(assignment: Iterable[tuple[int, int]]) -> SymmetricVector:
    """Correlator sums of an explicit per-party assignment of +-1 outcome pairs.

    Sums every ordered pair ``i != j`` directly; used as the brute-force
    counterpart of :func:`phi`.
    """
    pairs = list(assignment)
    m = len(pairs)
    if m < 1:
        raise PreconditionError("at least one party is required")
    for x, y in pairs:
        if x not in (1, -1) or y not in (1, -1):
            raise PreconditionError(f"outcomes must be +-1, got {(x, y)}")
    s0 = sum(x for x, _ in pairs)
    s1 = sum(y for _, y in pairs)
    s00 = s01 = s11 = 0
    for i, (xi, yi) in enumerate(pairs):
        for j, (xj, yj) in enumerate(pairs):
            if i != j:
                s00 += xi * xj
                s01 += xi * yj
                s11 += yi * yj
    return SymmetricVector(s0, s1, s00, s01, s11, m)


def counts_of(assignment: Iterable[tuple[int, int]]) -> StrategyCounts:
    tally = {(1, 1): 0, (1, -1): 0, (-1, 1): 0, (-1, -1): 0}
    for pair in assignment:
        tally[tuple(pair)] += 1
    return StrategyCounts(tally[(1, 1)], tally[(1, -1)], tally[(-1, 1)], tally[(-1, -1)])
