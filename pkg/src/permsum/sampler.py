"""Seeded Monte Carlo estimates of the permutation-sum law and of Q.

Samples are drawn in fixed-size chunks. Chunk ``i`` gets its own PCG64
stream from ``SeedSequence(seed, spawn_key=(i,))``, so the streams are
disjoint and the merged tally depends only on (seed, N), never on how many
workers processed the chunks.

The mode-frequency estimator q_hat = max tally / N is biased upward when
several values have nearly the same mass, because the largest observed bin
is selected after the fact. The Wilson interval reported with it treats the
mode bin as if it had been fixed in advance, so its coverage is heuristic.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dist import integer_image
from .errors import InvalidInputError
from .multiset import Multiset, format_rational

CHUNK = 8192
WILSON_Z = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class SampleConfig:
    seed: int = 0
    samples: int = 10_000
    workers: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        if self.samples < 1:
            raise InvalidInputError("samples must be positive")
        if self.workers < 1:
            raise InvalidInputError("workers must be positive")


@dataclass(frozen=True)
class EmpiricalDistribution:
    atoms: dict  # Fraction -> int
    total: int


@dataclass(frozen=True)
class QEstimate:
    q_hat: Fraction
    mode_value: Fraction
    ci_low: float
    ci_high: float
    N: int
    seed: int

    def to_obj(self) -> dict:
        return {"q_hat": format_rational(self.q_hat), "mode": format_rational(self.mode_value),
                "ci": [self.ci_low, self.ci_high], "N": self.N, "seed": self.seed}


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def shuffled_rows(rng: np.random.Generator, rows: int, n: int) -> np.ndarray:
    """``rows`` independent uniform permutations of range(n), Fisher-Yates."""
    perms = np.tile(np.arange(n, dtype=np.int64), (rows, 1))
    r = np.arange(rows)
    for i in range(n - 1, 0, -1):
        j = rng.integers(0, i + 1, size=rows)
        tmp = perms[r, i].copy()
        perms[r, i] = perms[r, j]
        perms[r, j] = tmp
    return perms


def sample_permutations(n: int, cfg: SampleConfig) -> np.ndarray:
    """The exact permutations ``sample_distribution`` would use, stacked."""
    out = []
    for chunk, size in _chunks(cfg.samples):
        out.append(shuffled_rows(chunk_rng(cfg.seed, chunk), size, n))
    return np.concatenate(out)


def _chunks(N: int):
    for i in range(math.ceil(N / CHUNK)):
        yield i, min(CHUNK, N - i * CHUNK)


def _tally_chunk(a, b, seed: int, chunk: int, size: int) -> Counter:
    perms = shuffled_rows(chunk_rng(seed, chunk), size, len(a))
    if isinstance(a, np.ndarray):
        sums = (a[None, :] * b[perms]).sum(axis=1)
        vals, counts = np.unique(sums, return_counts=True)
        return Counter(dict(zip(vals.tolist(), counts.tolist())))
    tally = Counter()
    for row in perms.tolist():
        tally[sum(x * b[j] for x, j in zip(a, row))] += 1
    return tally


def sample_distribution(A: Multiset, B: Multiset, cfg: SampleConfig) -> EmpiricalDistribution:
    if A.n != B.n:
        raise InvalidInputError(f"size mismatch: |A| = {A.n}, |B| = {B.n}")
    da, a = integer_image(A)
    db, b = integer_image(B)
    if A.n * max(map(abs, a)) * max(map(abs, b)) < 1 << 62:
        a, b = np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)
    jobs = list(_chunks(cfg.samples))

    def run(job):
        return _tally_chunk(a, b, cfg.seed, *job)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    tally = Counter()
    for part in parts:
        tally.update(part)
    scale = da * db
    return EmpiricalDistribution({Fraction(s, scale): c for s, c in tally.items()}, cfg.samples)


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    # at p_hat = 0 or 1 the general form loses the endpoint to rounding
    if successes == trials:
        return trials / (trials + z * z), 1.0
    if successes == 0:
        return 0.0, z * z / (trials + z * z)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def estimate_q(A: Multiset, B: Multiset, cfg: SampleConfig) -> QEstimate:
    emp = sample_distribution(A, B, cfg)
    best = max(emp.atoms.values())
    mode = min(v for v, c in emp.atoms.items() if c == best)
    if len(A.entries) == 1 or len(B.entries) == 1:
        # the sum is constant, so the law is a point mass
        low, high = 1.0, 1.0
    else:
        low, high = wilson_interval(best, emp.total)
    q_hat = Fraction(best, emp.total)
    low, high = min(low, float(q_hat)), max(high, float(q_hat))
    return QEstimate(q_hat, mode, low, high, emp.total, cfg.seed)
