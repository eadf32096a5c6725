"""Modulus of continuity, operator moment sequences, and rate verdicts.

A transformed sequence converges statistically to L "with rate o(u_n)" when
the weighted exceedance count

    W(n) = |{k <= n : |y_k - L| >= eps}| / (n u_n)

tends to zero for every eps (u_n positive nonincreasing; u_n = 1 recovers the
plain statistical notion).  Finite-horizon verdicts sample W at dyadic
horizons and require a decreasing trend plus a small final value; both
thresholds are reported so users can re-threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .fibonacci import FibCache, InvalidHorizonError
from .korovkin import GridFunction, OperatorFamily, second_moment, sup_norm_2pi
from .sequences import SeqPrefix, fib_difference_transform

RATE_O = "rate-o"
NOT_AT_THIS_RATE = "not-at-this-rate"
INCONCLUSIVE = "inconclusive"

WEIGHT_PRESET_NAMES = ("n^-1/4", "n^-1/2", "1/log", "const")


@dataclass(frozen=True)
class RateWeights:
    """A positive nonincreasing weight sequence u_n with a label."""

    name: str
    _fn: callable

    def values(self, n: int) -> np.ndarray:
        idx = np.arange(1, n + 1, dtype=float)
        u = np.asarray(self._fn(idx), dtype=float)
        if np.any(u <= 0):
            raise ValueError(f"weights {self.name} must be positive")
        if np.any(np.diff(u) > 1e-15):
            raise ValueError(f"weights {self.name} must be nonincreasing")
        return u

    def at(self, n: int) -> float:
        return float(self._fn(np.array([float(n)]))[0])

    def product(self, other: "RateWeights") -> "RateWeights":
        return RateWeights(
            name=f"({self.name})*({other.name})",
            _fn=lambda idx: self._fn(idx) * other._fn(idx),
        )

    def maximum(self, other: "RateWeights") -> "RateWeights":
        return RateWeights(
            name=f"max({self.name},{other.name})",
            _fn=lambda idx: np.maximum(self._fn(idx), other._fn(idx)),
        )


def weight_preset(name: str) -> RateWeights:
    if name == "n^-1/4":
        return RateWeights(name, lambda idx: idx ** -0.25)
    if name == "n^-1/2":
        return RateWeights(name, lambda idx: idx ** -0.5)
    if name == "1/log":
        return RateWeights(name, lambda idx: 1.0 / np.log(idx + 1.0))
    if name == "const":
        return RateWeights(name, lambda idx: np.ones_like(idx))
    if name == "n^-1":
        return RateWeights(name, lambda idx: 1.0 / idx)
    raise ValueError(f"unknown weight preset {name!r}; known: {', '.join(WEIGHT_PRESET_NAMES)}")


def modulus_of_continuity(f: GridFunction, delta: float) -> float:
    """Grid modulus: max |f(x)-f(y)| over node pairs at cyclic distance < delta.

    Computed with cyclic monotone (max/min) filters over windows of
    ceil(delta M / 2pi) samples, O(M) total.  The grid value underestimates
    the true modulus by at most 2 omega(f, 2pi/M); pick M accordingly.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if delta > 2.0 * math.pi:
        delta = 2.0 * math.pi
    h = 2.0 * math.pi / f.m
    smax = math.ceil(delta / h) - 1  # largest shift with s*h < delta
    if smax < 1:
        return 0.0
    w = min(smax + 1, f.m)
    mx = maximum_filter1d(f.samples, size=w, mode="wrap")
    mn = minimum_filter1d(f.samples, size=w, mode="wrap")
    return float((mx - mn).max())


def theta_sequence(family: OperatorFamily, kmax: int, m: int = 1024) -> SeqPrefix:
    """theta_k = sqrt(sup_x of the second moment), clamped at zero.

    The clamp absorbs tiny negative quadrature noise (the moment of a positive
    family is nonnegative up to rounding).
    """
    vals = np.empty(kmax)
    for k in range(1, kmax + 1):
        moment = second_moment(family, k, m).samples
        vals[k - 1] = math.sqrt(max(float(moment.max()), 0.0))
    return SeqPrefix.from_values(vals, label=f"theta[{family.name}]")


@dataclass(frozen=True)
class RateReport:
    label: str
    weights: str
    eps: float
    horizon: int
    dyadic_horizons: tuple
    weighted_counts: tuple
    final_weighted: float
    decreasing: bool
    final_threshold: float
    verdict: str


def _weighted_counts(values: np.ndarray, limit: float, weights: RateWeights, eps: float,
                     horizons) -> tuple:
    exceed = np.cumsum(np.abs(values - limit) >= eps, dtype=np.int64)
    out = []
    for n in horizons:
        out.append(float(exceed[n - 1] / (n * weights.at(n))))
    return tuple(out)


def rate_verdict(
    x,
    limit: float,
    weights: RateWeights,
    eps: float,
    cache: FibCache | None = None,
    n: int | None = None,
    pre_transformed: bool = False,
    final_threshold: float = 0.01,
    min_horizon: int = 10**4,
) -> RateReport:
    """Rate-o(u_n) verdict for the transformed sequence.

    ``pre_transformed`` feeds ``x`` directly to the exceedance counter (for
    synthetic or operator-made sequences whose preimage under the transform
    would overflow); otherwise the transform is applied first, which needs a
    cache of horizon + 1 terms.  Verdict rule (both knobs reported): rate-o
    iff the weighted counts decrease across the last three dyadic horizons
    and the final count is at most ``final_threshold``.
    """
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if pre_transformed:
        y = x
    else:
        if cache is None:
            raise ValueError("transforming requires a Fibonacci cache")
        y = fib_difference_transform(x, cache)
    values = np.asarray(y.terms, dtype=float)
    if n is not None:
        values = values[:n]
    horizon = len(values)
    if horizon < min_horizon:
        raise InvalidHorizonError(f"rate verdicts need at least {min_horizon} terms")
    weights.values(min(horizon, 4))  # validates positivity/monotonicity cheaply

    horizons = []
    h = horizon
    while h >= max(16, min_horizon // 64) and len(horizons) < 8:
        horizons.append(h)
        h //= 2
    horizons = tuple(reversed(horizons))
    counts = _weighted_counts(values, limit, weights, eps, horizons)
    last3 = counts[-3:]
    decreasing = all(last3[i + 1] <= last3[i] + 1e-12 for i in range(len(last3) - 1))
    final = counts[-1]
    if decreasing and final <= final_threshold:
        verdict = RATE_O
    elif final > final_threshold and final >= counts[-2] - 1e-12:
        verdict = NOT_AT_THIS_RATE
    else:
        verdict = INCONCLUSIVE
    return RateReport(
        label=getattr(x, "label", ""),
        weights=weights.name,
        eps=float(eps),
        horizon=horizon,
        dyadic_horizons=horizons,
        weighted_counts=counts,
        final_weighted=final,
        decreasing=decreasing,
        final_threshold=final_threshold,
        verdict=verdict,
    )


@dataclass(frozen=True)
class RateAlgebraReport:
    horizon: int
    eps: float
    scalar: RateReport
    combined: RateReport
    product: RateReport
    all_pass: bool


def rate_algebra_check(
    x,
    y,
    limit_x: float,
    limit_y: float,
    weights_x: RateWeights,
    weights_y: RateWeights,
    eps: float,
    scalar: float = 7.0,
    pre_transformed: bool = True,
    cache: FibCache | None = None,
    final_threshold: float = 0.05,
) -> RateAlgebraReport:
    """Empirical closure checks for the rate calculus.

    Given x with rate o(a_n) toward limit_x and y with rate o(b_n) toward
    limit_y, confirms on the data that (i) scalar multiples keep rate o(a_n)
    once eps scales along, (ii) the sum keeps rate o(max{a_n, b_n}), and
    (iii) the product (x - L1)(y - L2) keeps rate o(a_n b_n).  Failures are
    report content, not errors.
    """
    def prep(seq):
        if pre_transformed:
            return np.asarray(seq.terms, dtype=float)
        return np.asarray(fib_difference_transform(seq, cache).terms, dtype=float)

    vx, vy = prep(x), prep(y)
    m = min(len(vx), len(vy))
    vx, vy = vx[:m], vy[:m]

    sx = SeqPrefix(terms=scalar * vx, label=f"{scalar}*x")
    scalar_rep = rate_verdict(
        sx, scalar * limit_x, weights_x, abs(scalar) * eps,
        pre_transformed=True, final_threshold=final_threshold,
    )
    comb = SeqPrefix(terms=(vx - limit_x) + (vy - limit_y), label="x+y")
    combined_rep = rate_verdict(
        comb, 0.0, weights_x.maximum(weights_y), eps,
        pre_transformed=True, final_threshold=final_threshold,
    )
    prod = SeqPrefix(terms=(vx - limit_x) * (vy - limit_y), label="x*y")
    product_rep = rate_verdict(
        prod, 0.0, weights_x.product(weights_y), eps,
        pre_transformed=True, final_threshold=final_threshold,
    )
    ok = all(r.verdict == RATE_O for r in (scalar_rep, combined_rep, product_rep))
    return RateAlgebraReport(
        horizon=m, eps=eps, scalar=scalar_rep, combined=combined_rep,
        product=product_rep, all_pass=ok,
    )


@dataclass(frozen=True)
class RateBoundRow:
    k: int
    lhs: float
    constant_error: float
    theta: float
    omega: float
    rhs: float
    margin: float


@dataclass(frozen=True)
class RateBoundReport:
    """Per-index audit of the modulus-based operator error bound.

    Checks ||L_k f - f|| <= C ( ||L_k(1) - 1|| + w(f, theta_k)
    + w(f, theta_k) ||L_k(1) - 1|| ) with C = max{2, ||f||}.  The constant
    error is audited as ||L_k(1) - 1||; the "- x" variant sometimes printed
    for this hypothesis is dimensionally inconsistent on periodic functions
    and disagrees with the bound's own derivation.
    """

    family: str
    target: str
    kmax: int
    constant: float
    rows: tuple
    violations: tuple
    pointwise_checked: int
    pointwise_violations: int

    @property
    def all_ok(self) -> bool:
        return not self.violations and self.pointwise_violations == 0


def _pointwise_modulus_checks(f: GridFunction, deltas, rng, pairs_per_delta=200):
    """Sampled checks of |f(x)-f(y)| <= w(f,d) (|x-y|/d + 1) + 1e-10.

    Deltas below a few grid spacings are skipped: the grid modulus reads 0
    there and the comparison would be vacuous.
    """
    checked = violations = 0
    m = f.m
    xs = f.nodes()
    min_delta = 4.0 * (2.0 * math.pi / m)
    for d in deltas:
        if d < min_delta:
            continue
        om = modulus_of_continuity(f, d)
        i = rng.integers(0, m, size=pairs_per_delta)
        j = rng.integers(0, m, size=pairs_per_delta)
        diff = np.abs(f.samples[i] - f.samples[j])
        raw = np.abs(xs[i] - xs[j])
        dist = np.minimum(raw, 2.0 * np.pi - raw)  # cyclic distance
        bound = om * (dist / d + 1.0) + 1e-10
        checked += pairs_per_delta
        violations += int(np.count_nonzero(diff > bound))
    return checked, violations


def operator_rate_bound_audit(
    family: OperatorFamily,
    f: GridFunction,
    kmax: int,
    m: int | None = None,
    seed: int = 20260810,
) -> RateBoundReport:
    """Numerically audit the modulus bound for every k <= kmax."""
    m = m or f.m
    norm_f = sup_norm_2pi(f)
    c = max(2.0, norm_f)
    one = GridFunction.constant(1.0, f.m)
    rows = []
    violations = []
    thetas = []
    for k in range(1, kmax + 1):
        lf = family.apply(k, f).samples
        lhs = float(np.abs(lf - f.samples).max())
        e1 = float(np.abs(family.apply(k, one).samples - 1.0).max())
        moment = second_moment(family, k, f.m).samples
        theta = math.sqrt(max(float(moment.max()), 0.0))
        om = modulus_of_continuity(f, theta) if theta > 0 else 0.0
        rhs = c * (e1 + om + om * e1)
        margin = rhs - lhs
        rows.append(RateBoundRow(k=k, lhs=lhs, constant_error=e1, theta=theta,
                                 omega=om, rhs=rhs, margin=margin))
        thetas.append(theta)
        if margin < 0:
            violations.append(k)
    rng = np.random.default_rng(seed)
    deltas = sorted({round(t, 12) for t in thetas[:: max(1, kmax // 8)] if t > 0} | {0.25, 0.5, 1.0})
    checked, pviol = _pointwise_modulus_checks(f, deltas, rng)
    return RateBoundReport(
        family=family.name,
        target="",
        kmax=kmax,
        constant=c,
        rows=tuple(rows),
        violations=tuple(violations),
        pointwise_checked=checked,
        pointwise_violations=pviol,
    )
