"""Multisets of exact rationals, multiplicity profiles and the statistic M.

Values are ``fractions.Fraction`` throughout; a multiset is stored as its
sorted list of distinct values with multiplicities.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from decimal import Context, Decimal
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidInputError, NoDiversityError

# 40 digits leaves ample headroom over the 20-digit comparisons callers need.
LN_CONTEXT = Context(prec=40)


def parse_value(raw, where: str = "value") -> Fraction:
    """Parse one multiset entry: an int, or a string like ``"3"``, ``"-1/2"``."""
    if isinstance(raw, bool):
        raise InvalidInputError(f"{where}: booleans are not numbers")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        # binary floats are approximations; exact collisions need exact input
        raise InvalidInputError(f"{where}: got float {raw!r}, write it as a string such as \"1/3\"")
    if not isinstance(raw, str):
        raise InvalidInputError(f"{where}: expected string, got {type(raw).__name__}")
    text = raw.strip()
    if "e" in text.lower():
        raise InvalidInputError(f"{where}: exponent notation not accepted: {raw!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError(f"{where}: not a rational number: {raw!r}") from None


def format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Multiset:
    """A finite multiset of rationals.

    ``entries`` holds ``(value, multiplicity)`` pairs sorted by value, with
    distinct values and positive multiplicities.
    """

    entries: tuple[tuple[Fraction, int], ...]

    def __post_init__(self):
        if not self.entries:
            raise InvalidInputError("multiset must be nonempty")
        prev = None
        for value, mult in self.entries:
            if not isinstance(value, Fraction):
                raise InvalidInputError(f"value {value!r} is not a Fraction")
            if mult < 1:
                raise InvalidInputError(f"multiplicity of {value} must be positive")
            if prev is not None and value <= prev:
                raise InvalidInputError("entries must be sorted with distinct values")
            prev = value

    @classmethod
    def of(cls, values: Iterable) -> "Multiset":
        """Build from an iterable of values (ints, Fractions or rational strings)."""
        parsed = [v if isinstance(v, Fraction) else parse_value(v) for v in values]
        counts = Counter(parsed)
        return cls(tuple(sorted(counts.items())))

    @classmethod
    def from_json(cls, text: str) -> "Multiset":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_obj(obj)

    @classmethod
    def from_obj(cls, obj) -> "Multiset":
        if not isinstance(obj, dict) or "values" not in obj:
            raise InvalidInputError('expected an object with a "values" list')
        values = obj["values"]
        if not isinstance(values, list):
            raise InvalidInputError('"values" must be a list')
        if not values:
            raise InvalidInputError('"values" must be nonempty')
        return cls.of(parse_value(v, where=f"values[{i}]") for i, v in enumerate(values))

    def to_obj(self) -> dict:
        return {"values": [format_rational(v) for v in self.values]}

    @property
    def n(self) -> int:
        return sum(m for _, m in self.entries)

    @property
    def values(self) -> list[Fraction]:
        """All elements, repeated by multiplicity, ascending."""
        return [v for v, m in self.entries for _ in range(m)]

    @property
    def distinct(self) -> list[Fraction]:
        return [v for v, _ in self.entries]

    def is_set(self) -> bool:
        return all(m == 1 for _, m in self.entries)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v, _ in self.entries)

    def scaled(self, s: Fraction, t: Fraction = Fraction(0)) -> "Multiset":
        return Multiset.of(s * v + t for v in self.values)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return "Multiset({" + ", ".join(format_rational(v) for v in self.values) + "})"


@dataclass(frozen=True)
class MultiplicityProfile:
    parts: tuple[int, ...]
    n: int
    M: int

    @property
    def length(self) -> int:
        return len(self.parts)


def diversity_statistic(parts: Sequence[int] | MultiplicityProfile) -> int:
    """Return sum over i of (i-1)^2 * parts[i-1] for parts sorted nonincreasing."""
    if isinstance(parts, MultiplicityProfile):
        parts = parts.parts
    return sum(i * i * p for i, p in enumerate(parts))


def multiplicity_profile(B: Multiset) -> MultiplicityProfile:
    parts = tuple(sorted((m for _, m in B.entries), reverse=True))
    return MultiplicityProfile(parts=parts, n=sum(parts), M=diversity_statistic(parts))


def distinct_set_M(n: int) -> int:
    """M of an n-element set of distinct values."""
    return (n - 1) * n * (2 * n - 1) // 6


def staircase(partition: Sequence[int]) -> Multiset:
    """Multiset with partition[i] copies of the value i (0-based)."""
    if not partition:
        raise InvalidInputError("partition must be nonempty")
    if any(p < 1 for p in partition):
        raise InvalidInputError("partition parts must be positive")
    if any(a < b for a, b in zip(partition, partition[1:])):
        raise InvalidInputError("partition must be nonincreasing")
    return Multiset(tuple((Fraction(i), p) for i, p in enumerate(partition)))


def partitions(n: int, max_part: int | None = None):
    """Yield the partitions of n as nonincreasing tuples."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


@dataclass(frozen=True)
class Decomposition:
    """m disjoint copies of an r-element set inside a multiset."""

    m: int
    r: int
    witness: tuple[Fraction, ...]
    index: int


def ln_decimal(x: int) -> Decimal:
    return LN_CONTEXT.ln(Decimal(x))


def decompose(A: Multiset) -> Decomposition:
    """Find m copies of an r-set in A with r >= 2 and m*r^3*ln(n) >= M(A).

    Scans i = 2, 3, ... over the sorted multiplicities and returns the first
    index with i^3 * mu_i * ln(n) >= M(A); such an index always exists.
    The witness is the r most frequent values, ties broken by ascending value.
    """
    n = A.n
    if n < 3:
        raise InvalidInputError(f"decompose needs n >= 3, got n = {n}")
    prof = multiplicity_profile(A)
    if prof.M == 0:
        raise NoDiversityError("multiset has one distinct value (M = 0)")
    ln_n = ln_decimal(n)
    target = Decimal(prof.M)
    for i in range(2, prof.length + 1):
        mu = prof.parts[i - 1]
        if LN_CONTEXT.multiply(Decimal(i**3 * mu), ln_n) >= target:
            ranked = sorted(A.entries, key=lambda e: (-e[1], e[0]))
            witness = tuple(v for v, _ in ranked[:i])
            return Decomposition(m=mu, r=i, witness=witness, index=i)
    # unreachable: sum_{i>=2} (i-1)^2/i^3 < ln n for n >= 3
    raise AssertionError(f"no qualifying index for profile {prof.parts}")
