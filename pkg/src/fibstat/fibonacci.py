"""Exact Fibonacci numbers, consecutive-ratio sequences, and identity audits.

Everything downstream (the difference transform, the scaled Fejer operators)
leans on exact integer Fibonacci values; ratios are rendered to binary64 by a
single correctly-rounded integer division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

CONVENTION_F1 = "f1"  # f_1 = f_2 = 1 (default; matches the transform's indexing)
CONVENTION_F0 = "f0"  # f_0 = 0, f_1 = 1 (display only)


class InvalidHorizonError(ValueError):
    """Requested horizon is below the minimum a routine can work with."""


class IntegrityError(RuntimeError):
    """An exact arithmetic identity failed; the data cannot be trusted."""


@dataclass(frozen=True)
class FibCache:
    """Exact Fibonacci numbers f_1..f_N (or f_0..f_{N-1} under ``f0``).

    Immutable after construction; safe to share across threads.
    """

    values: tuple
    convention: str = CONVENTION_F1

    @property
    def n(self) -> int:
        return len(self.values)

    def fib(self, k: int) -> int:
        """Return f_k. Indexing starts at 1 under ``f1`` and 0 under ``f0``."""
        base = 1 if self.convention == CONVENTION_F1 else 0
        if k < base or k >= base + len(self.values):
            raise InvalidHorizonError(f"f_{k} is outside the cached horizon")
        return self.values[k - base]

    def __len__(self) -> int:
        return len(self.values)


def build_fib_cache(n_terms: int, convention: str = CONVENTION_F1) -> FibCache:
    """Build a cache of ``n_terms`` exact Fibonacci numbers.

    Arbitrary-precision integers throughout; f_n exceeds 64 bits at n = 93 and
    audit horizons run to several hundred.
    """
    if n_terms < 2:
        raise InvalidHorizonError(f"need at least 2 terms, got {n_terms}")
    if convention not in (CONVENTION_F1, CONVENTION_F0):
        raise ValueError(f"unknown convention {convention!r}")
    if convention == CONVENTION_F1:
        vals = [1, 1]
    else:
        vals = [0, 1]
    while len(vals) < n_terms:
        vals.append(vals[-1] + vals[-2])
    return FibCache(values=tuple(vals), convention=convention)


def ratios(cache: FibCache) -> np.ndarray:
    """Consecutive ratios r_n = f_{n+1}/f_n for n = 1..N-1.

    Each entry is one exact-integer division rendered to binary64; no floating
    recurrence is iterated, so the relative error stays at machine epsilon.
    """
    if cache.convention != CONVENTION_F1:
        raise ValueError("ratios are defined for the f1 convention")
    if cache.n < 3:
        raise InvalidHorizonError("need at least 3 cached terms for ratios")
    v = cache.values
    return np.array([v[i + 1] / v[i] for i in range(cache.n - 1)], dtype=float)


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of the exact identity audit over a cache."""

    horizon: int
    recurrence_checked: int
    cassini_checked: int
    variant_checked: int
    prefix_sum_checked: int
    reciprocal_checkpoints: tuple
    reciprocal_gaps: tuple
    reciprocal_cauchy_ok: bool


def _reciprocal_partial_sum(values, n) -> float:
    return math.fsum(1.0 / values[i] for i in range(n))


def identity_audit(
    cache: FibCache,
    reciprocal_tol: float = 1e-11,
    checkpoints: tuple = (30, 60, 90),
) -> IdentityReport:
    """Exact checks of the classical identities the rest of the toolkit uses.

    Verifies, in integer arithmetic with no tolerance:

    * the recurrence f_n = f_{n-1} + f_{n-2} for all cached n >= 3,
    * Cassini: f_{n-1} f_{n+1} - f_n^2 = (-1)^n  (under f_1 = f_2 = 1 the
      sign is (-1)^n; e.g. n = 5 gives 3*8 - 25 = -1),
    * the substituted variant f_{n-1}^2 + f_n f_{n-1} - f_n^2 = (-1)^n,
    * prefix sums: sum_{k=1}^{n} f_k = f_{n+2} - 1,

    and additionally confirms that partial sums of sum 1/f_k are Cauchy:
    successive checkpoint gaps shrink and the final gap is below
    ``reciprocal_tol``.

    Raises IntegrityError naming the offending index on any violation.
    """
    if cache.convention != CONVENTION_F1:
        raise ValueError("identity audit runs on the f1 convention")
    if cache.n < 4:
        raise InvalidHorizonError("need at least 4 cached terms")
    v = cache.values  # v[i] = f_{i+1}

    for i in range(2, cache.n):
        if v[i] != v[i - 1] + v[i - 2]:
            raise IntegrityError(f"recurrence violated at n={i + 1}")
    recurrence_checked = cache.n - 2

    cassini_checked = 0
    for i in range(1, cache.n - 1):
        n = i + 1  # fib index of v[i]
        if v[i - 1] * v[i + 1] - v[i] ** 2 != (-1) ** n:
            raise IntegrityError(f"Cassini identity violated at n={n}")
        cassini_checked += 1

    variant_checked = 0
    for i in range(1, cache.n):
        n = i + 1
        if v[i - 1] ** 2 + v[i] * v[i - 1] - v[i] ** 2 != (-1) ** n:
            raise IntegrityError(f"substituted Cassini variant violated at n={n}")
        variant_checked += 1

    prefix_sum_checked = 0
    running = 0
    for i in range(cache.n - 2):
        running += v[i]
        if running != v[i + 2] - 1:
            raise IntegrityError(f"prefix-sum identity violated at n={i + 1}")
        prefix_sum_checked += 1

    cps = tuple(c for c in checkpoints if c <= cache.n)
    if len(cps) < 2:
        cps = (max(2, cache.n // 2), cache.n)
    sums = [_reciprocal_partial_sum(v, c) for c in cps]
    gaps = tuple(abs(sums[i + 1] - sums[i]) for i in range(len(sums) - 1))
    cauchy_ok = all(gaps[i + 1] <= gaps[i] for i in range(len(gaps) - 1))
    cauchy_ok = cauchy_ok and gaps[-1] <= reciprocal_tol
    if not cauchy_ok:
        raise IntegrityError(
            f"reciprocal partial sums not Cauchy at tol {reciprocal_tol}: gaps {gaps}"
        )

    return IdentityReport(
        horizon=cache.n,
        recurrence_checked=recurrence_checked,
        cassini_checked=cassini_checked,
        variant_checked=variant_checked,
        prefix_sum_checked=prefix_sum_checked,
        reciprocal_checkpoints=cps,
        reciprocal_gaps=gaps,
        reciprocal_cauchy_ok=cauchy_ok,
    )
