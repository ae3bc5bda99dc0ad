import itertools
import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permsum import dist as dist_mod
from permsum.dist import (ExactDistribution, exact_distribution_dp, exact_distribution_enum,
                          exact_variance, max_point_mass, permutation_table)
from permsum.errors import CapExceededError, InvalidInputError
from permsum.multiset import Multiset, staircase


def naive_law(A: Multiset, B: Multiset) -> ExactDistribution:
    """Independent oracle: every permutation, Fraction arithmetic, no scaling."""
    a, b = A.values, B.values
    tally = Counter(sum(x * y for x, y in zip(a, p)) for p in itertools.permutations(b))
    return ExactDistribution(dict(tally), math.factorial(len(a)))


S123 = Multiset.of([1, 2, 3])
LAW123 = {Fraction(14): 1, Fraction(13): 2, Fraction(11): 2, Fraction(10): 1}


@pytest.mark.parametrize("engine", [exact_distribution_enum, exact_distribution_dp, naive_law])
def test_hand_enumerated_n3(engine):
    d = engine(S123, S123)
    assert d.atoms == LAW123
    assert d.total == 6


def test_counterexample_n6_law():
    A = Multiset.of([1, 2, 3, 0, 0, 0])
    B = Multiset.of([1, 0, 0, 0, 0, 0])
    expected = {Fraction(0): 360, Fraction(1): 120, Fraction(2): 120, Fraction(3): 120}
    for engine in (exact_distribution_enum, exact_distribution_dp):
        d = engine(A, B)
        assert d.atoms == expected and d.total == 720


@pytest.mark.parametrize("engine", [exact_distribution_enum, exact_distribution_dp])
def test_zero_coefficients(engine):
    A = Multiset.of([3, -1, 7, 2, 5])
    d = engine(A, Multiset.of([0] * 5))
    assert d.atoms == {Fraction(0): 120}


@pytest.mark.parametrize("engine", [exact_distribution_enum, exact_distribution_dp])
def test_constant_coefficients(engine):
    A = Multiset.of([3, -1, 7, 2, 5, 1])
    d = engine(A, Multiset.of(["2/3"] * 6))
    assert d.atoms == {Fraction(2, 3) * 17: 720}


@pytest.mark.parametrize("engine", [exact_distribution_enum, exact_distribution_dp])
def test_single_element(engine):
    d = engine(Multiset.of(["3/4"]), Multiset.of([-2]))
    assert d.atoms == {Fraction(-3, 2): 1}


def test_rational_inputs_match_naive():
    A = Multiset.of(["1/2", "1/3", "-2", "0", "1/2"])
    B = Multiset.of(["5/7", "1", "1", "-1/4", "2"])
    oracle = naive_law(A, B)
    assert exact_distribution_enum(A, B) == oracle
    assert exact_distribution_dp(A, B) == oracle


def test_sparse_path_matches_dense():
    # huge values force the dict-based DP
    A = Multiset.of([10**15, 3, 3, -10**14, 7])
    B = Multiset.of([1, 10**12, 5, 5, -2])
    d = exact_distribution_dp(A, B)
    assert d == naive_law(A, B)
    assert exact_distribution_enum(A, B) == d


def test_enum_workers_identical():
    A = Multiset.of([1, 4, 4, 9, -2, 0, 3])
    B = Multiset.of([2, 2, 5, -1, 0, 8, 1])
    assert exact_distribution_enum(A, B, workers=3) == exact_distribution_enum(A, B)


def test_permutation_table():
    for m in range(0, 7):
        t = permutation_table(m)
        assert t.shape == (math.factorial(m), m)
        assert len({tuple(r) for r in t.tolist()}) == math.factorial(m)


def test_caps_and_mismatch():
    A = Multiset.of(range(12))
    with pytest.raises(CapExceededError):
        exact_distribution_enum(A, A)
    with pytest.raises(CapExceededError):
        exact_distribution_dp(Multiset.of(range(17)), Multiset.of(range(17)))
    with pytest.raises(InvalidInputError):
        exact_distribution_dp(S123, Multiset.of([1, 2]))
    with pytest.raises(InvalidInputError):
        exact_distribution_enum(S123, Multiset.of([1, 2]))


def test_memory_budget_is_an_error():
    A = Multiset.of(range(1, 13))
    with pytest.raises(CapExceededError, match="memory budget"):
        exact_distribution_dp(A, A, memory_budget=10_000)


def test_max_point_mass_examples():
    r = max_point_mass(ExactDistribution(LAW123, 6))
    assert (r.q, r.argmax_value, r.support_size) == (Fraction(1, 3), 11, 4)
    r = max_point_mass(ExactDistribution({Fraction(0): 360, Fraction(1): 120, Fraction(2): 120,
                                          Fraction(3): 120}, 720))
    assert (r.q, r.argmax_value) == (Fraction(1, 2), 0)
    assert max_point_mass(ExactDistribution({Fraction(5): 24}, 24)).q == 1


def test_distribution_json_roundtrip():
    d = exact_distribution_dp(Multiset.of(["1/2", 1, 2]), S123)
    obj = d.to_obj()
    assert [v for v, _ in obj["atoms"]] == sorted((v for v, _ in obj["atoms"]), key=Fraction)
    assert ExactDistribution.from_obj(obj) == d


def test_distribution_invariants_checked():
    with pytest.raises(InvalidInputError):
        ExactDistribution({Fraction(1): 2}, 3)


def test_variance_examples():
    assert exact_variance(S123, S123) == 2
    assert exact_variance(S123, Multiset.of([4, 4, 4])) == 0
    S = staircase((3, 1, 1, 1))
    assert exact_variance(S, S) == exact_distribution_enum(S, S).variance()
    with pytest.raises(InvalidInputError):
        exact_variance(Multiset.of([1]), Multiset.of([2]))


int_lists = st.integers(1, 7).flatmap(
    lambda n: st.tuples(st.lists(st.integers(-9, 9), min_size=n, max_size=n),
                        st.lists(st.integers(-9, 9), min_size=n, max_size=n)))


@settings(max_examples=150, deadline=None)
@given(int_lists)
def test_engines_agree(pair):
    A, B = Multiset.of(pair[0]), Multiset.of(pair[1])
    d = exact_distribution_enum(A, B)
    assert exact_distribution_dp(A, B) == d
    q = max_point_mass(d).q
    assert Fraction(1, math.factorial(A.n)) <= q <= 1
    assert q >= Fraction(1, d.support_size)


@settings(max_examples=100, deadline=None)
@given(int_lists)
def test_symmetry_in_a_and_b(pair):
    A, B = Multiset.of(pair[0]), Multiset.of(pair[1])
    assert exact_distribution_dp(A, B) == exact_distribution_dp(B, A)


@settings(max_examples=100, deadline=None)
@given(int_lists, st.fractions(min_value=-5, max_value=5, max_denominator=6).filter(lambda s: s != 0),
       st.fractions(min_value=-5, max_value=5, max_denominator=6))
def test_affine_covariance(pair, s, t):
    A, B = Multiset.of(pair[0]), Multiset.of(pair[1])
    base = exact_distribution_dp(A, B)
    moved = exact_distribution_dp(A.scaled(s, t), B)
    shift = t * sum(B.values)
    assert moved == base.pushforward(lambda v: s * v + shift)
    assert max_point_mass(moved).q == max_point_mass(base).q


@settings(max_examples=100, deadline=None)
@given(int_lists.filter(lambda p: len(p[0]) >= 2))
def test_variance_identity(pair):
    A, B = Multiset.of(pair[0]), Multiset.of(pair[1])
    assert exact_variance(A, B) == exact_distribution_enum(A, B).variance()


@pytest.mark.parametrize("n", range(2, 8))
def test_generic_injectivity(n):
    rng = random.Random(n)
    primes = [p for p in range(10**5, 10**5 + 3000) if all(p % d for d in range(2, 320))]
    vals = rng.sample(primes, 2 * n)
    A = Multiset.of(v * v for v in vals[:n])
    B = Multiset.of(vals[n:])
    d = exact_distribution_dp(A, B)
    assert d.support_size == math.factorial(n)
    assert max_point_mass(d).q == Fraction(1, math.factorial(n))


def test_dense_limit_switch(monkeypatch):
    A = Multiset.of([1, 2, 2, 5, -3, 0])
    expected = exact_distribution_dp(A, A)
    monkeypatch.setattr(dist_mod, "DENSE_SPAN_LIMIT", 0)
    assert exact_distribution_dp(A, A) == expected
