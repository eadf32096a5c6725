import math

import numpy as np
import pytest

from fibstat.density import (
    IndexSet,
    axiom_suite,
    axiom_suite_intersecting,
    counting_function,
    density_estimate,
    named_sets,
    report_from_indicator,
)
from fibstat.fibonacci import InvalidHorizonError

SETS = named_sets()


def test_counting_squares():
    assert counting_function(SETS["squares"], 10**4) == 100  # floor(sqrt(n))
    # brute force cross-check on a small range
    brute = sum(1 for k in range(1, 201) if math.isqrt(k) ** 2 == k)
    assert counting_function(SETS["squares"], 200) == brute


def test_counting_evens_and_all():
    assert counting_function(SETS["evens"], 11) == 5
    assert counting_function(SETS["all"], 7) == 7


def test_counting_matches_indicator():
    for name in ("evens", "odds", "squares", "cubes", "multiples-of-3"):
        s = SETS[name]
        assert s.count(987) == int(np.count_nonzero(s.indicator_array(987)))


def test_counting_monotone():
    s = SETS["squares"]
    counts = [counting_function(s, n) for n in range(1, 300)]
    assert all(b >= a for a, b in zip(counts, counts[1:]))


def test_partition_identity_random_predicates():
    rng = np.random.default_rng(42)
    n = 10**4
    for _ in range(5):
        ind = rng.random(n) < rng.uniform(0.05, 0.95)
        a = IndexSet(name="rand", contains=None, indicator=lambda m, ind=ind: ind[:m])
        comp = a.complement()
        for m in (123, 5000, n):
            assert counting_function(a, m) + counting_function(comp, m) == m


def test_disjoint_union_counts_add():
    a, b = SETS["evens"], SETS["odds"]
    u = a.union(b)
    for n in (17, 1000):
        assert counting_function(u, n) == counting_function(a, n) + counting_function(b, n)


def test_density_evens():
    rep = density_estimate(SETS["evens"], 10**6)
    assert abs(rep.point_estimate - 0.5) <= 1e-3
    assert rep.verdict == "positive"
    assert rep.delta == pytest.approx(0.5, abs=1e-3)


def test_density_squares_exact_point():
    n = 10**6
    rep = density_estimate(SETS["squares"], n)
    assert rep.point_estimate == math.isqrt(n) / n
    assert rep.verdict == "zero"
    assert rep.delta is None


def test_density_multiples_of_three():
    rep = density_estimate(SETS["multiples-of-3"], 10**6)
    assert abs(rep.point_estimate - 1 / 3) <= 1e-3


def test_eventually_periodic_accuracy():
    for name, p, q in (("evens", 1, 2), ("odds", 1, 2), ("multiples-of-3", 1, 3),
                       ("multiples-of-5", 1, 5)):
        n = 10**5
        rep = density_estimate(SETS[name], n)
        assert abs(rep.point_estimate - p / q) <= q / n


def test_report_bounds_ordering():
    rep = density_estimate(SETS["squares"], 10**5)
    assert 0.0 <= rep.tail_min <= rep.point_estimate <= rep.tail_max <= 1.0


def test_density_horizon_floor():
    with pytest.raises(InvalidHorizonError):
        density_estimate(SETS["evens"], 50)


def test_axiom_suite_evens_odds():
    rep = axiom_suite(SETS["evens"], SETS["odds"], 10**5)
    assert rep.all_ok
    names = [c.name for c in rep.checks]
    assert "disjoint-superadditivity" in names
    assert "full-set-density-one" in names


def test_axiom_suite_rejects_overlap():
    with pytest.raises(ValueError, match="overlap"):
        axiom_suite(SETS["evens"], SETS["multiples-of-3"], 10**4)


def test_intersecting_axiom_with_self():
    rep = axiom_suite_intersecting(SETS["evens"], SETS["evens"], 10**5)
    check = rep.checks[0]
    # 0.5 + 0.5 <= 1 + 0.5 with tolerance to spare
    assert check.ok and check.lhs == pytest.approx(1.0, abs=1e-3)


def test_upper_density_of_squares_vanishes():
    n = 10**6
    rep = axiom_suite(SETS["squares"], SETS["none"], n)
    comp_check = [c for c in rep.checks if c.name.startswith("upper")][0]
    assert comp_check.ok
    # direct oracle: 1 - lower proxy of non-squares
    nonsq = SETS["squares"].complement()
    lower = report_from_indicator(nonsq.indicator_array(n), zero_threshold=0.0).tail_min
    assert 1.0 - lower <= 2.0 / math.sqrt(n)


def test_zero_threshold_scaling():
    # below ~160k the counting-noise floor 2/sqrt(N) exceeds the configured 0.005
    ind = np.zeros(10**4, dtype=bool)
    ind[::97] = True
    rep = report_from_indicator(ind, zero_threshold=0.005)
    assert rep.effective_threshold == max(0.005, 2.0 / math.sqrt(10**4))
