"""Anticoncentration bounds for permutation sums, checked against observed Q.

Exact bounds (the Pawlowski value and the count-derived value) get a
satisfied/violated verdict. Asymptotic bounds carry unknown constants, so by
default they only report the ratio observed/bound; pinning a constant with
``BoundSpec(pinned=True)`` turns them into assertions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from decimal import Context, Decimal
from fractions import Fraction

from .errors import InvalidInputError, NoDiversityError
from .multiset import Multiset, format_rational, multiplicity_profile

_CTX = Context(prec=40)
_OUT = Context(prec=12)

# 12 / sqrt(2 pi)
CONJECTURE_CONSTANT = _CTX.divide(Decimal(12), _CTX.sqrt(_CTX.multiply(Decimal(2), Decimal(
    "3.141592653589793238462643383279502884197"))))


class BoundKind(str, enum.Enum):
    PAWLOWSKI = "pawlowski"
    PAWLOWSKI_COUNT = "pawlowski_count"
    MAIN = "main"
    MAMB = "mamb"
    TIGHTNESS_LOWER = "tightness_lower"
    CONJECTURE_AP = "conjecture_ap"


class Status(str, enum.Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not-applicable"
    REPORTED_ONLY = "reported-only"


@dataclass(frozen=True)
class BoundSpec:
    kind: BoundKind
    constant: Fraction = Fraction(1)
    epsilon: Fraction = Fraction(1, 10)
    pinned: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", BoundKind(self.kind))
        if self.constant <= 0:
            raise InvalidInputError("bound constant C must be positive")
        if self.epsilon <= 0:
            raise InvalidInputError("epsilon must be positive")


ALL_BOUNDS = tuple(BoundSpec(k) for k in BoundKind)


@dataclass(frozen=True)
class VerdictRecord:
    kind: BoundKind
    bound_value: Decimal | None
    bound_exact: Fraction | None
    observed_q: Fraction
    ratio: Decimal | None
    status: Status
    note: str = ""

    def to_obj(self) -> dict:
        return {
            "bound_kind": self.kind.value,
            "bound_value": fmt_decimal(self.bound_value),
            "bound_exact": None if self.bound_exact is None else format_rational(self.bound_exact),
            "observed_q": format_rational(self.observed_q),
            "ratio": fmt_decimal(self.ratio),
            "status": self.status.value,
            "note": self.note,
        }


def fmt_decimal(x: Decimal | None) -> str:
    if x is None:
        return ""
    return format(_OUT.plus(x), "g")


def to_decimal(x: Fraction | int) -> Decimal:
    x = Fraction(x)
    return _CTX.divide(Decimal(x.numerator), Decimal(x.denominator))


# ---------------------------------------------------------------- formulas


def pawlowski_bound(n: int) -> Fraction:
    """1 / (2 ceil(n/2) + 1)."""
    if n < 3:
        raise InvalidInputError(f"Pawlowski bound needs n >= 3, got {n}")
    return Fraction(1, 2 * ((n + 1) // 2) + 1)


def pawlowski_count_bound(n: int) -> Fraction:
    """Largest hyperplane count over n!: (n-1)!/n! for odd n, n(n-2)!/n! for even n."""
    if n < 3:
        raise InvalidInputError(f"count-derived bound needs n >= 3, got {n}")
    if n % 2:
        return Fraction(math.factorial(n - 1), math.factorial(n))
    return Fraction(n * math.factorial(n - 2), math.factorial(n))


def mamb_applicable(n: int, MA: int, MB: int, epsilon: Fraction = Fraction(1, 10)) -> bool:
    """Exact test of MA*MB >= n^(3 + epsilon), via (MA*MB)^q >= n^(3q + p)."""
    epsilon = Fraction(epsilon)
    p, q = epsilon.numerator, epsilon.denominator
    return (MA * MB) ** q >= n ** (3 * q + p)


def mamb_bound(n: int, MA: int, MB: int, C: Fraction = Fraction(1),
               epsilon: Fraction = Fraction(1, 10)) -> tuple[Decimal, bool]:
    """C sqrt(n) (ln n)^2 / sqrt(MA MB), plus whether the precondition holds."""
    if MA <= 0 or MB <= 0:
        raise NoDiversityError("MAMB bound needs M(A) > 0 and M(B) > 0")
    if C <= 0:
        raise InvalidInputError("bound constant C must be positive")
    ln_n = _CTX.ln(Decimal(n))
    num = _CTX.multiply(_CTX.multiply(to_decimal(C), _CTX.sqrt(Decimal(n))), _CTX.power(ln_n, 2))
    value = _CTX.divide(num, _CTX.sqrt(Decimal(MA * MB)))
    return value, mamb_applicable(n, MA, MB, epsilon)


def main_bound(n: int, MB: int, C: Fraction = Fraction(1)) -> Decimal:
    """C / (n sqrt(M(B))), the bound without its n^{o(1)} factor."""
    if MB <= 0:
        raise NoDiversityError("main bound needs M(B) > 0")
    return _CTX.divide(to_decimal(C), _CTX.multiply(Decimal(n), _CTX.sqrt(Decimal(MB))))


def tightness_lower(n: int, MA: int, MB: int) -> Decimal:
    """sqrt(n) / sqrt(MA MB)."""
    if MA <= 0 or MB <= 0:
        raise NoDiversityError("tightness value needs M(A) > 0 and M(B) > 0")
    return _CTX.divide(_CTX.sqrt(Decimal(n)), _CTX.sqrt(Decimal(MA * MB)))


def conjecture_value(n: int) -> Decimal:
    return _CTX.multiply(CONJECTURE_CONSTANT, _CTX.power(Decimal(n), Decimal("-2.5")))


def conjecture_ratio(n: int, q: Fraction) -> Decimal:
    """q * n^{5/2} * sqrt(2 pi) / 12."""
    if n < 2:
        raise InvalidInputError(f"conjecture ratio needs n >= 2, got {n}")
    if not 0 < q <= 1:
        raise InvalidInputError(f"q must lie in (0, 1], got {q}")
    return _CTX.divide(to_decimal(q), conjecture_value(n))


# ------------------------------------------------------------------ verify


def _ratio(q: Fraction, value: Decimal) -> Decimal:
    return _CTX.divide(to_decimal(q), value)


def evaluate(spec: BoundSpec, A: Multiset, B: Multiset, q: Fraction) -> VerdictRecord:
    """One verdict for one bound, given the observed max point mass q."""
    n = A.n
    MA = multiplicity_profile(A).M
    MB = multiplicity_profile(B).M
    kind = spec.kind

    def na(note, value=None, exact=None):
        ratio = None if value is None else _ratio(q, value)
        return VerdictRecord(kind, value, exact, q, ratio, Status.NOT_APPLICABLE, note)

    if MB == 0:
        return na("coefficients b are all the same; every bound needs them not all equal")

    if kind in (BoundKind.PAWLOWSKI, BoundKind.PAWLOWSKI_COUNT):
        if n < 3:
            return na("needs n >= 3")
        exact = pawlowski_bound(n) if kind is BoundKind.PAWLOWSKI else pawlowski_count_bound(n)
        value = to_decimal(exact)
        if not A.is_set():
            return na("A has repeated values", value, exact)
        status = Status.SATISFIED if q <= exact else Status.VIOLATED
        note = ""
        if kind is BoundKind.PAWLOWSKI and status is Status.VIOLATED:
            note = "observed Q exceeds 1/(2ceil(n/2)+1); compare pawlowski_count"
        return VerdictRecord(kind, value, exact, q, _ratio(q, value), status, note)

    if kind is BoundKind.MAIN:
        value = main_bound(n, MB, spec.constant)
        if not A.is_set():
            return na("A has repeated values", value)
        return _asymptotic(spec, value, q, upper=True, note="n^{o(1)} factor omitted")

    if kind is BoundKind.MAMB:
        if MA == 0:
            return na("M(A) = 0")
        value, ok = mamb_bound(n, MA, MB, spec.constant, spec.epsilon)
        if not ok:
            return na(f"M(A)M(B) = {MA * MB} < n^(3+{format_rational(spec.epsilon)})", value)
        return _asymptotic(spec, value, q, upper=True)

    if kind is BoundKind.TIGHTNESS_LOWER:
        if MA == 0:
            return na("M(A) = 0")
        value = _CTX.multiply(to_decimal(spec.constant), tightness_lower(n, MA, MB))
        if not (A.is_integral() and B.is_integral()):
            return na("lower bound argument needs integer values", value)
        return _asymptotic(spec, value, q, upper=False)

    if kind is BoundKind.CONJECTURE_AP:
        if n < 2:
            return na("needs n >= 2")
        value = _CTX.multiply(to_decimal(spec.constant), conjecture_value(n))
        if not (A.is_set() and B.is_set()):
            return na("conjecture concerns duplicate-free A and B", value)
        return _asymptotic(spec, value, q, upper=True)

    raise InvalidInputError(f"unknown bound kind {kind}")


def _asymptotic(spec: BoundSpec, value: Decimal, q: Fraction, upper: bool, note: str = "") -> VerdictRecord:
    ratio = _ratio(q, value)
    if not spec.pinned:
        status = Status.REPORTED_ONLY
    else:
        qd = to_decimal(q)
        holds = qd <= value if upper else qd >= value
        status = Status.SATISFIED if holds else Status.VIOLATED
    return VerdictRecord(spec.kind, value, None, q, ratio, status, note)


@dataclass
class Verification:
    q: Fraction
    method: str
    verdicts: list = field(default_factory=list)


def verify(A: Multiset, B: Multiset, bounds=ALL_BOUNDS, method: str = "exact",
           dp_cap: int | None = None, cfg=None) -> Verification:
    """Compute Q (exactly, or by sampling) and evaluate every requested bound."""
    from .dist import DP_CAP, exact_distribution_dp, max_point_mass
    from .sampler import SampleConfig, estimate_q

    if A.n != B.n:
        raise InvalidInputError(f"size mismatch: |A| = {A.n}, |B| = {B.n}")
    if method == "exact":
        q = max_point_mass(exact_distribution_dp(A, B, cap=dp_cap or DP_CAP)).q
    elif method == "mc":
        q = estimate_q(A, B, cfg or SampleConfig()).q_hat
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    return Verification(q, method, [evaluate(spec, A, B, q) for spec in bounds])
