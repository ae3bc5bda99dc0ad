import random

import pytest

from permsum.multiset import Multiset

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    """Log one acceptance line; call with (criterion, passed, detail)."""
    def _record(criterion: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{mark}  {criterion}" + (f"  ({detail})" if detail else ""))


def random_multiset(rng: random.Random, n: int, lo: int = -9, hi: int = 9) -> Multiset:
    return Multiset.of(rng.randint(lo, hi) for _ in range(n))


@pytest.fixture
def rng():
    return random.Random(20261018)
