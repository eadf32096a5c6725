"""Finite-horizon natural-density estimation for sets of positive integers.

The density of A is the limit of A(n)/n with A(n) the counting function.
Finite data cannot decide the limit, so reports carry liminf/limsup proxies
(min/max of A(n)/n over the tail window [N/2, N]) and a three-way verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fibonacci import InvalidHorizonError

VERDICT_ZERO = "zero"
VERDICT_POSITIVE = "positive"
VERDICT_INCONCLUSIVE = "inconclusive"

DEFAULT_ZERO_THRESHOLD = 0.005

# Effective threshold floor: a single exceptional index contributes up to 2/N
# to the tail-window ratio, so certifying "zero" below the counting-noise
# scale c/sqrt(N) is meaningless.  Set counting_floor=0 for the raw threshold.
DEFAULT_COUNTING_FLOOR = 2.0


@dataclass(frozen=True)
class IndexSet:
    """A set of positive integers given by a total, deterministic predicate.

    ``indicator`` vectorizes membership over 1..N; ``count`` may supply a
    closed-form counting function for oracle sets. ``exact_density`` is the
    known limit for oracle families, None otherwise.
    """

    name: str
    contains: Callable[[int], bool]
    indicator: Callable[[int], np.ndarray] = None
    count: Callable[[int], int] = None
    exact_density: float | None = None

    def indicator_array(self, n: int) -> np.ndarray:
        if self.indicator is not None:
            ind = np.asarray(self.indicator(n), dtype=bool)
            if len(ind) != n:
                raise ValueError(f"indicator for {self.name} returned wrong length")
            return ind
        return np.fromiter((self.contains(k) for k in range(1, n + 1)), dtype=bool, count=n)

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(
            name=f"({self.name})|({other.name})",
            contains=lambda k: self.contains(k) or other.contains(k),
            indicator=lambda n: self.indicator_array(n) | other.indicator_array(n),
        )

    def intersection(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(
            name=f"({self.name})&({other.name})",
            contains=lambda k: self.contains(k) and other.contains(k),
            indicator=lambda n: self.indicator_array(n) & other.indicator_array(n),
        )

    def complement(self) -> "IndexSet":
        d = None if self.exact_density is None else 1.0 - self.exact_density
        return IndexSet(
            name=f"not({self.name})",
            contains=lambda k: not self.contains(k),
            indicator=lambda n: ~self.indicator_array(n),
            exact_density=d,
        )


def _multiples(q: int) -> IndexSet:
    return IndexSet(
        name=f"multiples-of-{q}",
        contains=lambda k, q=q: k % q == 0,
        indicator=lambda n, q=q: (np.arange(1, n + 1) % q) == 0,
        count=lambda n, q=q: n // q,
        exact_density=1.0 / q,
    )


def _iroot(n: int, p: int) -> int:
    """Largest r with r**p <= n, in exact integer arithmetic."""
    if p == 2:
        return math.isqrt(n)
    r = int(round(n ** (1.0 / p)))
    while r**p > n:
        r -= 1
    while (r + 1) ** p <= n:
        r += 1
    return r


def _powers(p: int, name: str) -> IndexSet:
    def ind(n, p=p):
        arr = np.zeros(n, dtype=bool)
        r = 1
        while r**p <= n:
            arr[r**p - 1] = True
            r += 1
        return arr

    return IndexSet(
        name=name,
        contains=lambda k, p=p: _iroot(k, p) ** p == k,
        indicator=ind,
        count=lambda n, p=p: _iroot(n, p),
        exact_density=0.0,
    )


def named_sets() -> dict:
    """Oracle index sets addressable by name (CLI and tests)."""
    evens = IndexSet(
        name="evens",
        contains=lambda k: k % 2 == 0,
        indicator=lambda n: (np.arange(1, n + 1) % 2) == 0,
        count=lambda n: n // 2,
        exact_density=0.5,
    )
    odds = IndexSet(
        name="odds",
        contains=lambda k: k % 2 == 1,
        indicator=lambda n: (np.arange(1, n + 1) % 2) == 1,
        count=lambda n: (n + 1) // 2,
        exact_density=0.5,
    )
    squares = _powers(2, "squares")
    cubes = _powers(3, "cubes")
    allz = IndexSet(
        name="all",
        contains=lambda k: True,
        indicator=lambda n: np.ones(n, dtype=bool),
        count=lambda n: n,
        exact_density=1.0,
    )
    none = IndexSet(
        name="none",
        contains=lambda k: False,
        indicator=lambda n: np.zeros(n, dtype=bool),
        count=lambda n: 0,
        exact_density=0.0,
    )
    return {
        s.name: s
        for s in (evens, odds, squares, cubes, _multiples(3), _multiples(5), allz, none)
    }


def counting_function(a: IndexSet, n: int) -> int:
    """Exact count of members of A that are <= n."""
    if n < 1:
        raise ValueError("counting function needs n >= 1")
    if a.count is not None:
        return int(a.count(n))
    return int(np.count_nonzero(a.indicator_array(n)))


@dataclass(frozen=True)
class DensityReport:
    """Counting-function density estimate with tail proxies and a verdict."""

    set_name: str
    horizon: int
    point_estimate: float
    tail_min: float
    tail_max: float
    zero_threshold: float
    effective_threshold: float
    verdict: str

    @property
    def delta(self) -> float | None:
        """Estimated density when the verdict is positive."""
        return self.point_estimate if self.verdict == VERDICT_POSITIVE else None


def report_from_indicator(
    ind: np.ndarray,
    name: str = "",
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
) -> DensityReport:
    """Density report for the set whose 1..N membership is ``ind``."""
    n = len(ind)
    if n < 2:
        raise InvalidHorizonError("need at least 2 indices")
    counts = np.cumsum(ind, dtype=np.int64)
    idx = np.arange(1, n + 1)
    lo = n // 2
    window = counts[lo - 1 :] / idx[lo - 1 :]
    tail_min = float(window.min())
    tail_max = float(window.max())
    point = float(counts[-1] / n)
    eff = max(zero_threshold, counting_floor / math.sqrt(n))
    if tail_max <= eff:
        verdict = VERDICT_ZERO
    elif tail_min > eff:
        verdict = VERDICT_POSITIVE
    else:
        verdict = VERDICT_INCONCLUSIVE
    return DensityReport(
        set_name=name,
        horizon=n,
        point_estimate=point,
        tail_min=tail_min,
        tail_max=tail_max,
        zero_threshold=zero_threshold,
        effective_threshold=eff,
        verdict=verdict,
    )


def density_estimate(
    a: IndexSet,
    n: int,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
) -> DensityReport:
    """Estimate the natural density of A at horizon n (n >= 100)."""
    if n < 100:
        raise InvalidHorizonError(f"density estimation needs n >= 100, got {n}")
    return report_from_indicator(
        a.indicator_array(n), a.name, zero_threshold, counting_floor
    )


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    lhs: float
    rhs: float
    tolerance: float
    ok: bool


@dataclass(frozen=True)
class AxiomReport:
    horizon: int
    tolerance: float
    checks: tuple

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)


def axiom_suite(a: IndexSet, b: IndexSet, n: int) -> AxiomReport:
    """Check the lower-density axioms on oracle sets at horizon n.

    Uses the lower proxy (tail-window minimum of A(m)/m) with tolerance
    2/sqrt(n): disjoint superadditivity, the intersection inequality, totality
    of the full set, and the complement identity for the upper density.  These
    are only meaningful for sets with known densities; the asymptotic axioms
    are not decidable from finite data for arbitrary predicates.
    """
    if a.exact_density is None or b.exact_density is None:
        raise ValueError("axiom checks run on oracle sets with known exact density")
    tol = 2.0 / math.sqrt(n)

    ia = a.indicator_array(n)
    ib = b.indicator_array(n)
    lower = lambda ind: report_from_indicator(ind, zero_threshold=0.0).tail_min
    upper = lambda ind: report_from_indicator(ind, zero_threshold=0.0).tail_max

    fa, fb = lower(ia), lower(ib)
    checks = []

    disjoint = not bool(np.any(ia & ib))
    if disjoint:
        fu = lower(ia | ib)
        checks.append(
            AxiomCheck("disjoint-superadditivity", fa + fb, fu + tol, tol, fa + fb <= fu + tol)
        )
    else:
        raise ValueError(
            f"sets {a.name} and {b.name} overlap below {n}; "
            "the disjoint superadditivity check does not apply"
        )

    fi = lower(ia & ib)
    checks.append(
        AxiomCheck("intersection-inequality", fa + fb, 1.0 + fi + tol, tol, fa + fb <= 1.0 + fi + tol)
    )

    full = lower(np.ones(n, dtype=bool))
    checks.append(AxiomCheck("full-set-density-one", full, 1.0, 0.0, full == 1.0))

    up_a = upper(ia)
    comp = 1.0 - lower(~ia)
    checks.append(
        AxiomCheck("upper-equals-one-minus-lower-complement", up_a, comp, tol, abs(up_a - comp) <= tol)
    )
    return AxiomReport(horizon=n, tolerance=tol, checks=tuple(checks))


def axiom_suite_intersecting(a: IndexSet, b: IndexSet, n: int) -> AxiomReport:
    """Axiom checks that apply to arbitrary (possibly overlapping) oracle sets."""
    if a.exact_density is None or b.exact_density is None:
        raise ValueError("axiom checks run on oracle sets with known exact density")
    tol = 2.0 / math.sqrt(n)
    ia = a.indicator_array(n)
    ib = b.indicator_array(n)
    lower = lambda ind: report_from_indicator(ind, zero_threshold=0.0).tail_min
    fa, fb, fi = lower(ia), lower(ib), lower(ia & ib)
    checks = (
        AxiomCheck("intersection-inequality", fa + fb, 1.0 + fi + tol, tol, fa + fb <= 1.0 + fi + tol),
    )
    return AxiomReport(horizon=n, tolerance=tol, checks=checks)
