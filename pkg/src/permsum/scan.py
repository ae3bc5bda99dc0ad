"""Instance families and the verdict table produced by ``permsum scan``."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .bounds import BoundSpec, VerdictRecord, evaluate, fmt_decimal
from .errors import InvalidInputError
from .multiset import Multiset, format_rational, multiplicity_profile, staircase

CSV_COLUMNS = ("n", "family", "M_A", "M_B", "Q_exact", "bound_kind", "bound_value",
               "ratio", "status", "q_method")
FAMILIES = ("uniform_grid", "staircase", "counterexample", "custom-list")


def uniform_grid(n: int) -> tuple[Multiset, Multiset]:
    """A = B = {1, ..., n}."""
    A = Multiset.of(range(1, n + 1))
    return A, A


def block_partition(n: int, block: int) -> tuple[int, ...]:
    """(block, block, ..., remainder): the staircase with equal-size steps."""
    if block < 1:
        raise InvalidInputError("block size must be positive")
    parts = [block] * (n // block)
    if n % block:
        parts.append(n % block)
    return tuple(parts)


def staircase_pair(n: int, block: int = 1) -> tuple[Multiset, Multiset]:
    S = staircase(block_partition(n, block))
    return S, S


def counterexample(n: int) -> tuple[Multiset, Multiset]:
    """A = {1..floor(n/2)} plus ceil(n/2) zeros, B = {1, 0, ..., 0}."""
    if n < 2:
        raise InvalidInputError("counterexample family needs n >= 2")
    half = n // 2
    A = Multiset.of(list(range(1, half + 1)) + [0] * (n - half))
    B = Multiset.of([1] + [0] * (n - 1))
    return A, B


def family_instance(family: str, n: int, block: int = 1) -> tuple[Multiset, Multiset]:
    if family == "uniform_grid":
        return uniform_grid(n)
    if family == "staircase":
        return staircase_pair(n, block)
    if family == "counterexample":
        return counterexample(n)
    raise InvalidInputError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")


@dataclass(frozen=True)
class ScanRow:
    n: int
    family: str
    M_A: int
    M_B: int
    q: Fraction
    verdict: VerdictRecord
    q_method: str

    def as_list(self) -> list:
        v = self.verdict
        return [self.n, self.family, str(self.M_A), str(self.M_B), format_rational(self.q),
                v.kind.value, fmt_decimal(v.bound_value), fmt_decimal(v.ratio), v.status.value,
                self.q_method]


def rows_for(family: str, A: Multiset, B: Multiset, q: Fraction, q_method: str,
             bounds: Sequence[BoundSpec]) -> list[ScanRow]:
    MA = multiplicity_profile(A).M
    MB = multiplicity_profile(B).M
    return [ScanRow(A.n, family, MA, MB, q, evaluate(spec, A, B, q), q_method) for spec in bounds]


class CsvSink:
    """Writes scan rows as they arrive so partial output survives a failure."""

    def __init__(self, stream):
        self.stream = stream
        # every rational/decimal goes in as a quoted string
        self.writer = csv.writer(stream, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
        self.writer.writerow(CSV_COLUMNS)
        stream.flush()

    def write(self, rows: Iterable[ScanRow]) -> None:
        for row in rows:
            self.writer.writerow(row.as_list())
        self.stream.flush()


def read_csv(stream) -> list[dict]:
    return list(csv.DictReader(stream))
