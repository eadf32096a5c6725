import math
from fractions import Fraction

import numpy as np
import pytest

from fibstat.fibonacci import InvalidHorizonError, build_fib_cache
from fibstat.sequences import (
    SeqPrefix,
    fib_difference_transform,
    frechet_distance,
    inverse_transform,
    witness,
)


@pytest.fixture(scope="module")
def cache():
    return build_fib_cache(260)


def exact_transform_oracle(exact_terms, fib):
    """Row-by-row rational evaluation, independent of the library path."""
    out = [Fraction(exact_terms[0])]
    for i in range(1, len(exact_terms)):
        out.append(
            Fraction(fib[i], fib[i + 1]) * exact_terms[i]
            - Fraction(fib[i + 1], fib[i]) * exact_terms[i - 1]
        )
    return out


def test_fib_squares_maps_to_unit_vector(cache):
    x = witness("fib-squares", 80)
    t = fib_difference_transform(x, cache)
    oracle = exact_transform_oracle(x.exact, cache.values)
    assert t.exact[0] == 1 and all(v == 0 for v in t.exact[1:])
    assert oracle == list(t.exact)
    assert t.terms[0] == 1.0
    assert np.abs(t.terms[1:]).max() == 0.0


def test_zero_sequence(cache):
    t = fib_difference_transform(SeqPrefix.from_values(np.zeros(50)), cache)
    assert np.all(t.terms == 0.0)


def test_ones_sequence_second_entry(cache):
    t = fib_difference_transform(SeqPrefix.from_values(np.ones(10)), cache)
    assert t.terms[0] == 1.0
    assert t.terms[1] == pytest.approx(1 / 2 - 2, abs=0)  # f_2/f_3 - f_3/f_2


def test_linearity(cache):
    rng = np.random.default_rng(3)
    for _ in range(5):
        xa, xb = rng.normal(size=120), rng.normal(size=120)
        al, be = rng.uniform(-4, 4, size=2)
        lhs = fib_difference_transform(SeqPrefix.from_values(al * xa + be * xb), cache).terms
        rhs = (
            al * fib_difference_transform(SeqPrefix.from_values(xa), cache).terms
            + be * fib_difference_transform(SeqPrefix.from_values(xb), cache).terms
        )
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_round_trip_recovers_input(cache):
    rng = np.random.default_rng(11)
    for _ in range(10):
        x = SeqPrefix.from_values(rng.uniform(-10, 10, 200))
        back = inverse_transform(fib_difference_transform(x, cache), cache)
        scale = np.maximum(np.abs(x.terms), 1.0)
        assert (np.abs(back.terms - x.terms) / scale).max() <= 1e-9


def test_inverse_of_unit_vector_is_fib_squares(cache):
    b = SeqPrefix.from_exact([1] + [0] * 39)
    x = inverse_transform(b, cache)
    expect = [cache.values[i + 1] ** 2 for i in range(40)]
    assert list(x.exact) == expect


def test_inverse_of_zero(cache):
    x = inverse_transform(SeqPrefix.from_values(np.zeros(30)), cache)
    assert np.all(x.terms == 0.0)


def test_transform_requires_cache_headroom():
    with pytest.raises(InvalidHorizonError):
        fib_difference_transform(SeqPrefix.from_values(np.ones(50)), build_fib_cache(50))


def test_frechet_identity_and_example():
    x = SeqPrefix.from_values([1.0, 0.0, 0.0, 0.0])
    zero = SeqPrefix.from_values([0.0, 0.0, 0.0, 0.0])
    assert frechet_distance(x, x).value == 0.0
    d = frechet_distance(x, zero)
    assert d.value == 0.25  # single term (1/2)(1/2)
    assert d.tail_bound == 2.0**-4


def test_frechet_bound_and_metric_axioms():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, b, c = (SeqPrefix.from_values(rng.normal(size=40) * 10) for _ in range(3))
        dab = frechet_distance(a, b).value
        dba = frechet_distance(b, a).value
        assert dab == dba >= 0.0
        assert dab < 1.0 + 2.0**-40
        dac = frechet_distance(a, c).value
        dcb = frechet_distance(c, b).value
        assert dab <= dac + dcb + 1e-15


def test_frechet_zero_iff_equal():
    rng = np.random.default_rng(9)
    vals = rng.normal(size=30)
    a = SeqPrefix.from_values(vals)
    b = SeqPrefix.from_values(vals.copy())
    assert frechet_distance(a, b, truncation=30).value == 0.0
    vals2 = vals.copy()
    vals2[7] += 0.5
    assert frechet_distance(a, SeqPrefix.from_values(vals2), truncation=30).value > 0.0


@pytest.mark.parametrize(
    "name,n,expect",
    [
        ("fib-squares", 4, [1.0, 4.0, 9.0, 25.0]),
        ("char-squares", 10, [1, 0, 0, 1, 0, 0, 0, 0, 1, 0]),
        ("n-on-squares", 5, [1, 0, 0, 4, 0]),
        ("alt01", 6, [1, 0, 1, 0, 1, 0]),
        ("n-linear", 5, [1, 2, 3, 4, 5]),
    ],
)
def test_witness_values(name, n, expect):
    assert witness(name, n).terms.tolist() == [float(v) for v in expect]


def test_odd_even_matches_alt01():
    a = witness("alt01", 100)
    o = witness("odd-even", 100)
    assert np.array_equal(a.terms, o.terms)
    assert o.label == "odd-even"


def test_unknown_witness():
    with pytest.raises(ValueError, match="unknown witness"):
        witness("nope", 10)


def test_fib_squares_overflow_flagged():
    x = witness("fib-squares", 800)
    assert x.overflow_at == 739
    assert len(x.terms) == 738
    assert np.all(np.isfinite(x.terms))


def test_overflowed_input_transforms_exactly(cache):
    big = build_fib_cache(820)
    x = witness("fib-squares", 800)
    t = fib_difference_transform(x, big)
    # the exact path cancels row by row; no overflow in the image
    assert t.overflow_at is None
    assert np.abs(t.terms[1:]).max() == 0.0


def test_float_overflow_during_transform_is_flagged(cache):
    vals = np.full(20, 1.0e308)
    vals[:2] = 1.0
    x = SeqPrefix(terms=vals, label="huge")  # no exact carrier
    t = fib_difference_transform(x, cache)
    assert t.overflow_at is not None
    assert np.all(np.isfinite(t.terms))


def test_prefix_rejects_nonfinite():
    with pytest.raises(ValueError):
        SeqPrefix.from_values([1.0, np.inf])
