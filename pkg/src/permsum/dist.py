"""Exact law of the permutation sum  sum_i a_i * b_pi(i)  for uniform pi.

Two independent engines produce the same ``ExactDistribution``:

* ``exact_distribution_enum`` walks every one of the n! permutations.
* ``exact_distribution_dp`` is a dynamic program over contingency tables:
  distinct values of A are placed one block at a time into the still-free
  copies of B's distinct values, with multinomial weights.

Both clear denominators first so that all arithmetic is on integers.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import CapExceededError, InvalidInputError
from .multiset import Multiset, format_rational

ENUM_CAP = 11
DP_CAP = 16
DP_MEMORY_BUDGET = 2 * 1024**3  # bytes held by one DP layer
DENSE_SPAN_LIMIT = 1 << 20
_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class ExactDistribution:
    atoms: dict  # Fraction -> int
    total: int

    def __post_init__(self):
        if self.total < 1:
            raise InvalidInputError("total must be positive")
        if any(c < 1 for c in self.atoms.values()):
            raise InvalidInputError("atom counts must be positive")
        if sum(self.atoms.values()) != self.total:
            raise InvalidInputError("atom counts must sum to total")

    @property
    def support_size(self) -> int:
        return len(self.atoms)

    def probability(self, x) -> Fraction:
        return Fraction(self.atoms.get(Fraction(x), 0), self.total)

    def mean(self) -> Fraction:
        return sum((v * c for v, c in self.atoms.items()), Fraction(0)) / self.total

    def variance(self) -> Fraction:
        mu = self.mean()
        return sum(((v - mu) ** 2 * c for v, c in self.atoms.items()), Fraction(0)) / self.total

    def pushforward(self, fn) -> "ExactDistribution":
        out = Counter()
        for v, c in self.atoms.items():
            out[fn(v)] += c
        return ExactDistribution(dict(out), self.total)

    def to_obj(self) -> dict:
        return {
            "total": str(self.total),
            "atoms": [[format_rational(v), str(self.atoms[v])] for v in sorted(self.atoms)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj())

    @classmethod
    def from_obj(cls, obj) -> "ExactDistribution":
        try:
            atoms = {Fraction(v): int(c) for v, c in obj["atoms"]}
            return cls(atoms, int(obj["total"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed distribution object: {exc}") from None


@dataclass(frozen=True)
class PointMassReport:
    q: Fraction
    argmax_value: Fraction
    support_size: int

    def to_obj(self) -> dict:
        return {
            "q": format_rational(self.q),
            "argmax": format_rational(self.argmax_value),
            "support_size": self.support_size,
        }


def max_point_mass(dist: ExactDistribution) -> PointMassReport:
    """Largest atom; ties go to the smallest value."""
    if not dist.atoms:
        raise InvalidInputError("empty distribution")
    best = max(dist.atoms.values())
    arg = min(v for v, c in dist.atoms.items() if c == best)
    return PointMassReport(Fraction(best, dist.total), arg, len(dist.atoms))


def _check_sizes(A: Multiset, B: Multiset) -> int:
    if A.n != B.n:
        raise InvalidInputError(f"size mismatch: |A| = {A.n}, |B| = {B.n}")
    return A.n


def _common_denominator(M: Multiset) -> int:
    return math.lcm(*(v.denominator for v in M.distinct))


def integer_image(M: Multiset) -> tuple[int, list[int]]:
    """Return (d, values * d) with d the lcm of the denominators."""
    d = _common_denominator(M)
    return d, [int(v * d) for v in M.values]


# ---------------------------------------------------------------- enumeration


@lru_cache(maxsize=4)
def permutation_table(m: int) -> np.ndarray:
    """All m! permutations of range(m) as rows of an int8 array."""
    table = np.zeros((1, 0), dtype=np.int8)
    for k in range(1, m + 1):
        prev = table
        f = prev.shape[0]
        table = np.empty((f * k, k), dtype=np.int8)
        for p in range(k):
            block = table[p * f:(p + 1) * f]
            block[:, :p] = prev[:, :p]
            block[:, p] = k - 1
            block[:, p + 1:] = prev[:, p:]
    table.setflags(write=False)
    return table


def _enum_prefix(a: np.ndarray, b: np.ndarray, first: int) -> Counter:
    """Tally sums over permutations with pi(0) = first."""
    n = len(a)
    rest = np.delete(b, first)
    table = permutation_table(n - 1)
    sums = np.full(table.shape[0], a[0] * b[first], dtype=np.int64)
    for col in range(n - 1):
        sums += a[col + 1] * rest[table[:, col]]
    vals, counts = np.unique(sums, return_counts=True)
    return Counter(dict(zip(vals.tolist(), counts.tolist())))


def _enum_python(a: list[int], b: list[int]) -> Counter:
    tally = Counter()
    for perm in itertools.permutations(b):
        tally[sum(x * y for x, y in zip(a, perm))] += 1
    return tally


def exact_distribution_enum(A: Multiset, B: Multiset, cap: int = ENUM_CAP,
                            workers: int = 1) -> ExactDistribution:
    """Exact law by visiting all n! permutations (sharded on pi(0))."""
    n = _check_sizes(A, B)
    if n > cap:
        raise CapExceededError(f"n = {n} exceeds the enumeration cap {cap}; use the DP engine")
    da, a = integer_image(A)
    db, b = integer_image(B)
    scale = da * db
    bound = n * max(map(abs, a)) * max(map(abs, b))
    if bound >= _INT64_SAFE or n == 1:
        tally = _enum_python(a, b)
    else:
        av = np.array(a, dtype=np.int64)
        bv = np.array(b, dtype=np.int64)
        tally = Counter()
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(lambda j: _enum_prefix(av, bv, j), range(n)))
        else:
            parts = [_enum_prefix(av, bv, j) for j in range(n)]
        for part in parts:
            tally.update(part)
    atoms = {Fraction(s, scale): c for s, c in tally.items()}
    return ExactDistribution(atoms, math.factorial(n))


# ------------------------------------------------------------------------- DP


def _row_placements(k: int, free: tuple[int, ...]):
    """Yield (N, weight) with N_j <= free_j, sum N = k, weight = k!/prod N_j!."""
    q = len(free)
    kf = math.factorial(k)

    def rec(j, left, acc, denom):
        if j == q:
            if left == 0:
                yield tuple(acc), kf // denom
            return
        capacity = sum(free[j:])
        if capacity < left:
            return
        for t in range(min(left, free[j]), -1, -1):
            acc.append(t)
            yield from rec(j + 1, left - t, acc, denom * math.factorial(t))
            acc.pop()

    yield from rec(0, k, [], 1)


def _dp_orientation(A: Multiset, B: Multiset) -> tuple[Multiset, Multiset]:
    """Put the side with fewer count-vector states in the DP state."""
    def states(M):
        return math.prod(m + 1 for _, m in M.entries)
    if states(A) < states(B):
        return B, A
    return A, B


def exact_distribution_dp(A: Multiset, B: Multiset, cap: int = DP_CAP,
                          memory_budget: int = DP_MEMORY_BUDGET) -> ExactDistribution:
    """Exact law by a DP over how many copies of each B value are used.

    A permutation induces a table N[i][j] counting positions where A's i-th
    distinct value meets B's j-th; the number of permutations inducing it is
    prod k_i! * prod l_j! / prod N_ij!. Rows of the table are filled one
    distinct A value at a time; the state is the vector of B copies used so
    far, and each state carries the distribution of the partial sum.
    """
    n = _check_sizes(A, B)
    if n > cap:
        raise CapExceededError(f"n = {n} exceeds the DP cap {cap}")
    rows_ms, cols_ms = _dp_orientation(A, B)
    dr = _common_denominator(rows_ms)
    dc = _common_denominator(cols_ms)
    rows = [(int(v * dr), k) for v, k in rows_ms.entries]
    cols = [int(v * dc) for v in cols_ms.distinct]
    col_mult = tuple(m for _, m in cols_ms.entries)

    lo_c, hi_c = min(cols), max(cols)
    span = 1 + sum(k * abs(v) for v, k in rows) * (hi_c - lo_c)
    magnitude = sum(k * abs(v) for v, k in rows) * max(abs(lo_c), abs(hi_c))
    dense = span <= DENSE_SPAN_LIMIT and magnitude < _INT64_SAFE and n <= 20
    if dense:
        final = _dp_dense(rows, cols, col_mult, memory_budget)
    else:
        final = _dp_sparse(rows, cols, col_mult, memory_budget)
    mult = math.prod(math.factorial(m) for m in col_mult)
    scale = dr * dc
    atoms = {Fraction(s, scale): c * mult for s, c in final.items() if c}
    return ExactDistribution(atoms, math.factorial(n))


def _dp_dense(rows, cols, col_mult, memory_budget) -> dict:
    start = tuple(0 for _ in cols)
    lo = 0
    layer = {start: np.ones(1, dtype=np.int64)}
    for value, k in rows:
        contrib = [value * c for c in cols]
        new_lo = lo + k * min(contrib)
        new_hi = lo + (next(iter(layer.values())).shape[0] - 1) + k * max(contrib)
        width = new_hi - new_lo + 1
        nxt: dict = {}
        for used, arr in layer.items():
            free = tuple(m - u for m, u in zip(col_mult, used))
            for N, w in _row_placements(k, free):
                target = tuple(u + t for u, t in zip(used, N))
                shift = sum(t * c for t, c in zip(N, contrib))
                dst = nxt.get(target)
                if dst is None:
                    if (len(nxt) + 1) * width * 8 > memory_budget:
                        raise CapExceededError(
                            f"DP layer exceeds memory budget of {memory_budget} bytes")
                    dst = nxt[target] = np.zeros(width, dtype=np.int64)
                off = lo + shift - new_lo
                if w == 1:
                    dst[off:off + arr.shape[0]] += arr
                else:
                    dst[off:off + arr.shape[0]] += w * arr
        layer, lo = nxt, new_lo
    (arr,) = layer.values()
    idx = np.nonzero(arr)[0]
    return dict(zip((idx + lo).tolist(), arr[idx].tolist()))


def _dp_sparse(rows, cols, col_mult, memory_budget) -> dict:
    layer = {tuple(0 for _ in cols): {0: 1}}
    for value, k in rows:
        contrib = [value * c for c in cols]
        nxt: dict = {}
        entries = 0
        for used, dist in layer.items():
            free = tuple(m - u for m, u in zip(col_mult, used))
            for N, w in _row_placements(k, free):
                target = tuple(u + t for u, t in zip(used, N))
                shift = sum(t * c for t, c in zip(N, contrib))
                dst = nxt.setdefault(target, {})
                before = len(dst)
                for s, c in dist.items():
                    key = s + shift
                    dst[key] = dst.get(key, 0) + w * c
                entries += len(dst) - before
            # ~100 bytes per int->int dict entry in CPython
            if entries * 100 > memory_budget:
                raise CapExceededError(f"DP layer exceeds memory budget of {memory_budget} bytes")
        layer = nxt
    (final,) = layer.values()
    return final


def exact_distribution(A: Multiset, B: Multiset, method: str = "dp",
                       enum_cap: int = ENUM_CAP, dp_cap: int = DP_CAP,
                       workers: int = 1) -> ExactDistribution:
    if method == "enum" or method == "exact":
        return exact_distribution_enum(A, B, cap=enum_cap, workers=workers)
    if method == "dp":
        return exact_distribution_dp(A, B, cap=dp_cap)
    raise InvalidInputError(f"unknown exact method {method!r}")


# ------------------------------------------------------------------- variance


def exact_variance(A: Multiset, B: Multiset) -> Fraction:
    """Var of the permutation sum: S_A * S_B / (n - 1), S = centred sum of squares."""
    n = _check_sizes(A, B)
    if n < 2:
        raise InvalidInputError("variance needs n >= 2")

    def centred_ss(M: Multiset) -> Fraction:
        mean = sum((v * m for v, m in M.entries), Fraction(0)) / n
        return sum(((v - mean) ** 2 * m for v, m in M.entries), Fraction(0))

    return centred_ss(A) * centred_ss(B) / (n - 1)
