"""Additive-energy quantities K_c, K'_c, kappa_c, kappa'_c.

For multisets A (size n) and B (size n'), and a tuple c of s >= 2 nonzero
integers, K_c counts the 4s-tuples of indices with

    sum_k c_k (a_{i_k} - a_{j_k}) (b_{i'_k} - b_{j'_k}) = 0,

and kappa_c = K_c / (n n')^{2s}. Equivalently kappa_c = P[sum c_k Z_k = 0]
where Z = (A1 - A2)(B1 - B2) for independent uniform draws; the convolution
path uses that form, the brute-force path counts tuples directly.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from decimal import Context, Decimal
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CapExceededError, InvalidInputError
from .multiset import Multiset, format_rational

BRUTE_BUDGET = 10**9
CONVOLUTION_BUDGET = 10**8
_DIGITS = Context(prec=12)
_WORK = Context(prec=40)


def coefficient_tuple(c: Sequence[int]) -> tuple[int, ...]:
    c = tuple(c)
    if len(c) < 2:
        raise InvalidInputError(f"coefficient tuple needs s >= 2 entries, got {c}")
    if any(isinstance(x, bool) or not isinstance(x, int) for x in c):
        raise InvalidInputError(f"coefficients must be integers: {c}")
    if any(x == 0 for x in c):
        raise InvalidInputError(f"coefficients must be nonzero: {c}")
    return c


@dataclass(frozen=True)
class ValueDistribution:
    atoms: dict  # Fraction -> Fraction

    def __post_init__(self):
        if any(p <= 0 for p in self.atoms.values()):
            raise InvalidInputError("probabilities must be positive")
        if sum(self.atoms.values()) != 1:
            raise InvalidInputError("probabilities must sum to 1")

    @property
    def normalized(self) -> bool:
        return True

    def collision_probability(self) -> Fraction:
        return sum((p * p for p in self.atoms.values()), Fraction(0))


@dataclass(frozen=True)
class EnergyReport:
    kappa: Fraction
    K: int | None
    method: str  # "convolution", "brute" or "brute_distinct"
    c: tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.c)

    def to_obj(self) -> dict:
        obj = {"method": self.method, "s": self.s, "c": list(self.c),
               "kappa": format_rational(self.kappa),
               "kappa_decimal": decimal_string(self.kappa)}
        if self.K is not None:
            obj["K"] = str(self.K)
        if self.method == "brute_distinct":
            obj["normalization"] = "(n*n')^(2s)"
        return obj


def decimal_string(x: Fraction, digits: int = 12) -> str:
    ctx = Context(prec=digits)
    return format(ctx.divide(Decimal(x.numerator), Decimal(x.denominator)), "g")


def _scaled_ints(M: Multiset) -> list[int]:
    d = math.lcm(*(v.denominator for v in M.distinct))
    return [int(v * d) for v in M.values]


def _difference_counts(M: Multiset) -> Counter:
    """Counts of a1 - a2 over ordered pairs, on the integer-scaled values."""
    d = math.lcm(*(v.denominator for v in M.distinct))
    entries = [(int(v * d), m) for v, m in M.entries]
    out = Counter()
    for x, mx in entries:
        for y, my in entries:
            out[x - y] += mx * my
    return out


def _z_counts(A: Multiset, B: Multiset) -> Counter:
    """Integer-keyed counts of Z on scaled values; total (n n')^2."""
    da = _difference_counts(A)
    db = _difference_counts(B)
    out = Counter()
    for x, cx in da.items():
        for y, cy in db.items():
            out[x * y] += cx * cy
    return out


def z_distribution(A: Multiset, B: Multiset) -> ValueDistribution:
    """Exact law of (A1 - A2)(B1 - B2) with independent uniform draws."""
    total = (A.n * B.n) ** 2
    diffs_a = Counter()
    for x, mx in A.entries:
        for y, my in A.entries:
            diffs_a[x - y] += mx * my
    diffs_b = Counter()
    for x, mx in B.entries:
        for y, my in B.entries:
            diffs_b[x - y] += mx * my
    out = Counter()
    for x, cx in diffs_a.items():
        for y, cy in diffs_b.items():
            out[x * y] += cx * cy
    return ValueDistribution({z: Fraction(c, total) for z, c in out.items()})


def _convolve(p: dict, q: dict) -> dict:
    out: dict = {}
    for x, cx in p.items():
        for y, cy in q.items():
            key = x + y
            out[key] = out.get(key, 0) + cx * cy
    return out


def kappa_convolution(A: Multiset, B: Multiset, c: Sequence[int],
                      budget: int = CONVOLUTION_BUDGET) -> EnergyReport:
    """kappa_c as the mass at 0 of sum_k c_k Z_k, by exact convolution.

    Also returns K_c, which is the unnormalized mass at 0.
    """
    c = coefficient_tuple(c)
    z = _z_counts(A, B)
    total = (A.n * B.n) ** 2
    # fold small |c_k| first; every factor has the same support size
    order = sorted(c, key=abs)
    acc = {order[0] * v: w for v, w in z.items()}
    for coef in order[1:-1]:
        if len(acc) * len(z) > budget:
            raise CapExceededError(f"convolution work {len(acc) * len(z)} exceeds budget {budget}")
        acc = _convolve(acc, {coef * v: w for v, w in z.items()})
    last = order[-1]
    K = 0
    for x, w in acc.items():
        if x % last == 0:
            K += w * z.get(-x // last, 0)
    return EnergyReport(Fraction(K, total ** len(c)), K, "convolution", c)


def _block_arrays(A: Multiset, B: Multiset):
    a = _scaled_ints(A)
    b = _scaled_ints(B)
    n, m = len(a), len(b)
    idx = np.array(list(itertools.product(range(n), range(n), range(m), range(m))), dtype=np.int64)
    I, J, Ip, Jp = idx.T
    av = np.array(a, dtype=object)
    bv = np.array(b, dtype=object)
    vals = (av[I] - av[J]) * (bv[Ip] - bv[Jp])
    big = max(abs(int(v)) for v in vals) if len(vals) else 0
    if big < 1 << 40:
        vals = vals.astype(np.int64)
    return I, J, Ip, Jp, vals


def kappa_bruteforce(A: Multiset, B: Multiset, c: Sequence[int], distinct: bool = False,
                     budget: int = BRUTE_BUDGET) -> EnergyReport:
    """Count K_c (or K'_c when ``distinct``) by walking every 4s-tuple.

    Both are normalized by (n n')^{2s}. The outer s-1 blocks are looped in
    Python, the last block is vectorized.
    """
    c = coefficient_tuple(c)
    s = len(c)
    n, m = A.n, B.n
    work = (n * m) ** (2 * s)
    if work > budget:
        raise CapExceededError(f"brute force needs {work} tuples, budget is {budget}")
    I, J, Ip, Jp, vals = _block_arrays(A, B)
    L = len(vals)
    base_ok = (I != J) & (Ip != Jp) if distinct else np.ones(L, dtype=bool)
    if vals.dtype != object and max(abs(x) for x in c) * s * (int(np.abs(vals).max()) + 1) >= 1 << 62:
        vals = vals.astype(object)
    last = c[-1] * vals

    K = 0
    for prefix in itertools.product(range(L), repeat=s - 1):
        mask = base_ok
        if distinct:
            used_a = []
            used_b = []
            clash = False
            for t in prefix:
                ia, ja, ib, jb = int(I[t]), int(J[t]), int(Ip[t]), int(Jp[t])
                if ia == ja or ib == jb or ia in used_a or ja in used_a or ib in used_b or jb in used_b:
                    clash = True
                    break
                used_a += (ia, ja)
                used_b += (ib, jb)
            if clash:
                continue
            mask = base_ok.copy()
            for u in used_a:
                mask &= (I != u) & (J != u)
            for u in used_b:
                mask &= (Ip != u) & (Jp != u)
        partial = sum(coef * vals[t] for coef, t in zip(c, prefix))
        K += int(np.count_nonzero((last == -partial) & mask))
    method = "brute_distinct" if distinct else "brute"
    return EnergyReport(Fraction(K, (n * m) ** (2 * s)), K, method, c)


@dataclass(frozen=True)
class RnrReport:
    kappa: Fraction
    size_a: int
    size_b: int
    ratio: Decimal

    def to_obj(self) -> dict:
        return {"kappa": format_rational(self.kappa), "kappa_decimal": decimal_string(self.kappa),
                "size_a": self.size_a, "size_b": self.size_b, "ratio": format(self.ratio, "g")}


def rnr_ratio(A: Multiset, B: Multiset) -> RnrReport:
    """kappa_{(1,-1)} * |A| * |B| / (ln|A| + ln|B|) for duplicate-free A, B."""
    if not (A.is_set() and B.is_set()):
        raise InvalidInputError("rnr_ratio needs duplicate-free A and B")
    if A.n < 2 or B.n < 2:
        raise InvalidInputError("rnr_ratio needs |A|, |B| >= 2")
    kappa = kappa_convolution(A, B, (1, -1)).kappa
    num = _WORK.divide(Decimal(kappa.numerator * A.n * B.n), Decimal(kappa.denominator))
    den = _WORK.add(_WORK.ln(Decimal(A.n)), _WORK.ln(Decimal(B.n)))
    return RnrReport(kappa, A.n, B.n, _DIGITS.divide(num, den))
