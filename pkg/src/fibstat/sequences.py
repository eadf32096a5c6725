"""Finite sequence prefixes, the Fibonacci difference transform, and witnesses.

The transform is the bidiagonal map

    y_1 = (f_1/f_2) x_1 = x_1
    y_n = (f_n/f_{n+1}) x_n - (f_{n+1}/f_n) x_{n-1},   n >= 2.

Row 1 carries the single diagonal entry f_1/f_2: it is the only convention
under which the prefix x_n = f_{n+1}^2 maps to (1, 0, 0, ...).

Inverting the map amplifies perturbations by roughly the squared golden ratio
per index, so round-tripping through binary64 is hopeless beyond a few dozen
terms.  Prefixes therefore carry an exact rational view of their terms (floats
are exact rationals) up to a size cap, and the transform/inverse run losslessly
on that carrier; the stored float terms are each a single rounding of the
exact value.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .fibonacci import FibCache, InvalidHorizonError

# Largest horizon at which float-born prefixes keep an exact rational view.
EXACT_CARRIER_LIMIT = 4096

_FLOAT_MAX = sys.float_info.max

WITNESS_NAMES = (
    "fib-squares",      # x_n = f_{n+1}^2
    "alt01",            # 1, 0, 1, 0, ...
    "char-squares",     # 1 iff n is a perfect square
    "n-linear",         # x_n = n
    "n-on-squares",     # x_n = n iff n is a perfect square, else 0
    "odd-even",         # 1 iff n is odd (same values as alt01)
)


def _render(exact_terms):
    """Render exact values to float64, truncating at the first overflow.

    Returns (float array, overflow_at) with overflow_at a 1-based index or None.
    """
    out = []
    for i, v in enumerate(exact_terms):
        try:
            fv = float(v)
        except OverflowError:
            return np.array(out, dtype=float), i + 1
        if not math.isfinite(fv):
            return np.array(out, dtype=float), i + 1
        out.append(fv)
    return np.array(out, dtype=float), None


@dataclass(frozen=True)
class SeqPrefix:
    """A finite prefix x_1..x_N of a real sequence.

    ``terms`` holds finite float64 values; if the exact values overflow
    binary64 the array is truncated and ``overflow_at`` records the 1-based
    index of the first unrepresentable term.  ``exact`` (ints or Fractions,
    full horizon) is kept when available so exact-arithmetic paths can be used.
    """

    terms: np.ndarray
    label: str = ""
    exact: tuple | None = None
    overflow_at: int | None = None

    @property
    def horizon(self) -> int:
        return len(self.exact) if self.exact is not None else len(self.terms)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("a sequence prefix needs at least one term")
        if len(self.terms) and not np.all(np.isfinite(self.terms)):
            raise ValueError("prefix terms must be finite; overflow is flagged, not stored")

    @classmethod
    def from_values(cls, values, label: str = "") -> "SeqPrefix":
        """Build from floats, retaining the exact rational view when small."""
        arr = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("input values must be finite")
        exact = tuple(Fraction(v) for v in arr) if len(arr) <= EXACT_CARRIER_LIMIT else None
        return cls(terms=arr, label=label, exact=exact)

    @classmethod
    def from_exact(cls, values, label: str = "") -> "SeqPrefix":
        """Build from exact ints/Fractions; floats are truncated at overflow."""
        exact = tuple(values)
        terms, overflow_at = _render(exact)
        return cls(terms=terms, label=label, exact=exact, overflow_at=overflow_at)


@dataclass(frozen=True)
class TransformResult:
    """Image of a prefix under the difference transform."""

    terms: np.ndarray
    label: str = ""
    exact: tuple | None = None
    overflow_at: int | None = None

    @property
    def horizon(self) -> int:
        return len(self.exact) if self.exact is not None else len(self.terms)

    def as_prefix(self, label: str | None = None) -> SeqPrefix:
        return SeqPrefix(
            terms=self.terms,
            label=self.label if label is None else label,
            exact=self.exact,
            overflow_at=self.overflow_at,
        )


def _require_cache(cache: FibCache, n: int):
    if cache.n < n + 1:
        raise InvalidHorizonError(
            f"transform over {n} terms needs a cache of {n + 1} Fibonacci numbers, "
            f"got {cache.n}"
        )


def transform_coefficients(cache: FibCache, n: int):
    """Float64 diagonal (f_n/f_{n+1}) and subdiagonal (f_{n+1}/f_n) entries."""
    _require_cache(cache, n)
    v = cache.values
    diag = np.array([v[i] / v[i + 1] for i in range(n)], dtype=float)
    sub = np.array([v[i + 1] / v[i] for i in range(n)], dtype=float)
    return diag, sub


def fib_difference_transform(x: SeqPrefix, cache: FibCache) -> TransformResult:
    """Apply the bidiagonal Fibonacci-ratio difference map to a prefix.

    Uses exact rational arithmetic when the prefix carries exact terms (one
    rounding per stored output term); otherwise the float path multiplies each
    term by coefficients obtained from exact integer division.  Results beyond
    the representable range are flagged via ``overflow_at``, never saturated.
    """
    n = x.horizon
    _require_cache(cache, n)
    v = cache.values
    if x.exact is not None:
        ex = x.exact
        out = [Fraction(ex[0])]
        for i in range(1, n):
            # (f_i+1/f_i+2) x_{i+1} - (f_i+2/f_i+1) x_i with 0-based v
            out.append(Fraction(v[i], v[i + 1]) * ex[i] - Fraction(v[i + 1], v[i]) * ex[i - 1])
        terms, overflow_at = _render(out)
        return TransformResult(
            terms=terms,
            label=f"transform({x.label})" if x.label else "transform",
            exact=tuple(out),
            overflow_at=overflow_at,
        )

    m = len(x.terms)  # may be shorter than the horizon if x overflowed
    diag, sub = transform_coefficients(cache, m)
    y = np.empty(m)
    y[0] = x.terms[0]
    if m > 1:
        y[1:] = diag[1:] * x.terms[1:] - sub[1:] * x.terms[:-1]
    overflow_at = x.overflow_at
    bad = ~np.isfinite(y)
    if bad.any():
        first = int(np.argmax(bad))
        y = y[:first]
        overflow_at = first + 1
    return TransformResult(
        terms=y,
        label=f"transform({x.label})" if x.label else "transform",
        overflow_at=overflow_at,
    )


def inverse_transform(b, cache: FibCache) -> SeqPrefix:
    """Forward substitution on the bidiagonal system: x with transform(x) = b.

    x_1 = b_1 and x_n = (f_{n+1}/f_n) (b_n + (f_{n+1}/f_n) x_{n-1}).  Runs on
    the exact carrier when present; the float fallback amplifies input error
    by ~phi^2 per index and is only trustworthy for short or structured data.
    """
    n = b.horizon
    _require_cache(cache, n)
    v = cache.values
    exact = getattr(b, "exact", None)
    if exact is not None:
        out = [Fraction(exact[0])]
        for i in range(1, n):
            s = Fraction(v[i + 1], v[i])
            out.append(s * (exact[i] + s * out[-1]))
        terms, overflow_at = _render(out)
        return SeqPrefix(
            terms=terms,
            label=f"inverse({b.label})" if b.label else "inverse",
            exact=tuple(out),
            overflow_at=overflow_at,
        )

    m = len(b.terms)
    out = np.empty(m)
    out[0] = b.terms[0]
    for i in range(1, m):
        s = v[i + 1] / v[i]
        out[i] = s * (b.terms[i] + s * out[i - 1])
    if not np.all(np.isfinite(out)):
        first = int(np.argmax(~np.isfinite(out)))
        return SeqPrefix(
            terms=out[:first],
            label="inverse",
            overflow_at=first + 1,
        )
    return SeqPrefix(terms=out, label=f"inverse({b.label})" if b.label else "inverse")


class FrechetDistance(NamedTuple):
    value: float
    tail_bound: float


def frechet_distance(x, y, truncation: int | None = None) -> FrechetDistance:
    """Truncated Frechet metric sum_{k<=K} 2^{-k} |x_k-y_k| / (1+|x_k-y_k|).

    The default truncation min(N, 64) puts the tail bound 2^{-K} below machine
    epsilon; the bound is returned alongside the value.
    """
    nx, ny = len(x.terms), len(y.terms)
    k = min(nx, ny, 64) if truncation is None else truncation
    if k < 1 or k > min(nx, ny):
        raise ValueError(f"truncation order {k} exceeds the common horizon {min(nx, ny)}")
    d = np.abs(x.terms[:k] - y.terms[:k])
    weights = np.ldexp(1.0, -np.arange(1, k + 1))
    return FrechetDistance(float(np.sum(weights * d / (1.0 + d))), math.ldexp(1.0, -k))


def _fib_to(n: int):
    vals = [1, 1]
    while len(vals) < n:
        vals.append(vals[-1] + vals[-2])
    return vals


def witness(name: str, n: int) -> SeqPrefix:
    """Produce a named witness prefix of length ``n``.

    Exact integer terms are retained for horizons up to EXACT_CARRIER_LIMIT so
    transform-side checks can run losslessly (``fib-squares`` overflows
    binary64 near index 739 and is unusable as floats beyond that).
    """
    if n < 1:
        raise ValueError("witness horizon must be positive")
    keep_exact = n <= EXACT_CARRIER_LIMIT

    if name == "fib-squares":
        if not keep_exact:
            raise InvalidHorizonError(
                f"fib-squares is exact-only; horizon {n} exceeds {EXACT_CARRIER_LIMIT}"
            )
        f = _fib_to(n + 1)
        return SeqPrefix.from_exact([f[i] ** 2 for i in range(1, n + 1)], label=name)

    if name in ("alt01", "odd-even"):
        arr = np.zeros(n)
        arr[::2] = 1.0  # x_1 = 1 (index 1 is odd)
        exact = tuple(1 if i % 2 == 0 else 0 for i in range(n)) if keep_exact else None
        return SeqPrefix(terms=arr, label=name, exact=exact)

    if name == "char-squares":
        arr = np.zeros(n)
        roots = np.arange(1, math.isqrt(n) + 1)
        arr[roots * roots - 1] = 1.0
        exact = tuple(int(v) for v in arr) if keep_exact else None
        return SeqPrefix(terms=arr, label=name, exact=exact)

    if name == "n-linear":
        arr = np.arange(1, n + 1, dtype=float)
        exact = tuple(range(1, n + 1)) if keep_exact else None
        return SeqPrefix(terms=arr, label=name, exact=exact)

    if name == "n-on-squares":
        arr = np.zeros(n)
        roots = np.arange(1, math.isqrt(n) + 1)
        arr[roots * roots - 1] = (roots * roots).astype(float)
        exact = tuple(int(v) for v in arr) if keep_exact else None
        return SeqPrefix(terms=arr, label=name, exact=exact)

    raise ValueError(f"unknown witness {name!r}; known: {', '.join(WITNESS_NAMES)}")
