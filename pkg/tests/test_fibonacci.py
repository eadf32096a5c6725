import math
from fractions import Fraction

import numpy as np
import pytest

from fibstat.fibonacci import (
    GOLDEN_RATIO,
    FibCache,
    IntegrityError,
    InvalidHorizonError,
    build_fib_cache,
    identity_audit,
    ratios,
)


def brute_force_fib(n):
    """Independent integer-recurrence oracle (f_1 = f_2 = 1)."""
    vals = [1, 1]
    for _ in range(n - 2):
        vals.append(vals[-1] + vals[-2])
    return vals


def test_first_twelve_values():
    cache = build_fib_cache(12)
    assert cache.values == (1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144)


def test_base_case():
    assert build_fib_cache(2).values == (1, 1)


def test_f90_against_brute_force():
    cache = build_fib_cache(90)
    oracle = brute_force_fib(90)
    assert cache.fib(90) == oracle[-1] == 2880067194370816120
    assert list(cache.values) == oracle


def test_f0_convention_for_display():
    cache = build_fib_cache(6, convention="f0")
    assert cache.values == (0, 1, 1, 2, 3, 5)
    assert cache.fib(0) == 0 and cache.fib(5) == 5


def test_recurrence_exact_everywhere():
    cache = build_fib_cache(300)
    v = cache.values
    for i in range(2, 300):
        assert v[i] == v[i - 1] + v[i - 2]


def test_invalid_horizon():
    with pytest.raises(InvalidHorizonError):
        build_fib_cache(1)


def test_ratio_values():
    r = ratios(build_fib_cache(12))
    assert r[0] == 1.0 and r[1] == 2.0 and r[2] == 1.5
    assert r[9] == 89 / 55  # ~1.6181818...


def test_ratio_convergence_to_golden_ratio():
    r = ratios(build_fib_cache(300))
    err = np.abs(r[39:] - GOLDEN_RATIO)  # n = 40..299
    assert err.max() <= 1e-12


def test_ratios_are_single_exact_divisions():
    cache = build_fib_cache(200)
    r = ratios(cache)
    for i in (10, 50, 150):
        assert r[i] == cache.values[i + 1] / cache.values[i]


def test_cassini_example_n5():
    # operands from the opening list: f_4 f_6 - f_5^2 = 3*8 - 25 = -1 = (-1)^5
    assert 3 * 8 - 5**2 == -1 == (-1) ** 5


def test_cassini_sign_brute_force():
    v = brute_force_fib(50)
    for i in range(1, 49):
        n = i + 1
        assert v[i - 1] * v[i + 1] - v[i] ** 2 == (-1) ** n


def test_variant_identity_brute_force():
    v = brute_force_fib(50)
    for i in range(1, 50):
        n = i + 1
        assert v[i - 1] ** 2 + v[i] * v[i - 1] - v[i] ** 2 == (-1) ** n


def test_prefix_sum_example():
    v = brute_force_fib(12)
    assert sum(v[:10]) == 143 == v[11] - 1  # f_12 = 144


def test_identity_audit_passes():
    report = identity_audit(build_fib_cache(300))
    assert report.recurrence_checked == 298
    assert report.cassini_checked == 298
    assert report.reciprocal_cauchy_ok


def test_reciprocal_gap_matches_exact_oracle():
    # exact-rational oracle for the 60..90 reciprocal partial-sum gap; the
    # true value is ~1.045e-12, just above a naive 1e-12 guess
    v = brute_force_fib(90)
    gap = float(sum(Fraction(1, v[k]) for k in range(60, 90)))
    report = identity_audit(build_fib_cache(300))
    assert report.reciprocal_checkpoints[:3] == (30, 60, 90)
    assert report.reciprocal_gaps[1] == pytest.approx(gap, rel=1e-6)
    assert 5e-13 < report.reciprocal_gaps[1] < 2e-12
    assert report.reciprocal_gaps[1] < report.reciprocal_gaps[0]


def test_tampered_cache_raises_naming_index():
    v = list(build_fib_cache(20).values)
    v[9] += 1
    with pytest.raises(IntegrityError, match="n="):
        identity_audit(FibCache(values=tuple(v)))


def test_audit_needs_four_terms():
    with pytest.raises(InvalidHorizonError):
        identity_audit(build_fib_cache(3))
