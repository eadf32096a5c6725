"""Finite-horizon verdicts for statistical convergence and its relatives.

A sequence converges statistically to L when, for every eps > 0, the index set
{k : |x_k - L| >= eps} has natural density zero.  On a finite prefix every
verdict is a heuristic; reports say which threshold fired, and "inconclusive"
is a first-class outcome.  The transform-composed notions apply the same tests
to the Fibonacci difference transform of the prefix.

Classification ladder (deterministic precedence):

1. ``stat-convergent`` -- some candidate limit has zero deviation density at
   every grid epsilon;
2. ``divergent`` -- certified: for some eps, every possible limit leaves a
   deviation set of fraction >= the divergence threshold (an interval-mass
   bound over all of R, so this outranks the bounded-only fallback);
3. ``stat-cauchy-only`` / ``stat-bounded-only`` -- the weaker property holds
   but convergence could not be established;
4. ``inconclusive`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import (
    DEFAULT_COUNTING_FLOOR,
    DEFAULT_ZERO_THRESHOLD,
    VERDICT_POSITIVE,
    VERDICT_ZERO,
    DensityReport,
    report_from_indicator,
)
from .fibonacci import FibCache, InvalidHorizonError
from .sequences import SeqPrefix, fib_difference_transform, witness, WITNESS_NAMES

CLASS_CONVERGENT = "stat-convergent"
CLASS_CAUCHY_ONLY = "stat-cauchy-only"
CLASS_BOUNDED_ONLY = "stat-bounded-only"
CLASS_DIVERGENT = "divergent"
CLASS_INCONCLUSIVE = "inconclusive"

YES = "yes"
NO = "no"
INCONCLUSIVE = "inconclusive"

DEFAULT_MIN_HORIZON = 1000
DIVERGENCE_THRESHOLD = 0.25


def _values_of(x, n=None):
    """Finite float terms of a prefix/transform plus its overflow flag."""
    terms = np.asarray(x.terms, dtype=float)
    overflowed = getattr(x, "overflow_at", None) is not None
    if n is not None:
        if n > len(terms) and not overflowed:
            raise InvalidHorizonError(f"requested horizon {n} exceeds prefix length {len(terms)}")
        terms = terms[:n]
    return terms, overflowed


def deviation_report(
    values: np.ndarray,
    limit: float,
    eps: float,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
) -> DensityReport:
    """Density report for the deviation set {k : |x_k - L| >= eps}."""
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    ind = np.abs(values - limit) >= eps
    return report_from_indicator(
        ind, name=f"|x-{limit:g}|>={eps:g}", zero_threshold=zero_threshold,
        counting_floor=counting_floor,
    )


def _max_interval_mass(values: np.ndarray, width: float) -> float:
    """Largest fraction of values inside any half-open interval of ``width``.

    Any open ball of radius width/2 around a candidate limit is contained in
    some [v_i, v_i + width), so 1 minus this mass lower-bounds the deviation
    fraction over every possible limit.
    """
    s = np.sort(values)
    hi = np.searchsorted(s, s + width, side="left")
    return float((hi - np.arange(len(s))).max() / len(s))


def certified_no_limit(values: np.ndarray, eps: float) -> tuple:
    """(certified, min deviation fraction over all candidate limits)."""
    frac = 1.0 - _max_interval_mass(values, 2.0 * eps)
    return frac >= DIVERGENCE_THRESHOLD, frac


def _candidate_limits(values: np.ndarray, eps_min: float, max_bins: int = 65536):
    """Candidate limits: histogram mode after trimming density-zero spikes.

    Drops the top/bottom 1% of entries ranked by magnitude, bins the rest at
    width eps_min/2, and proposes the centers of bins holding at least half
    the trimmed mass, the median inside the heaviest bin, and the median of
    the tail window (a statistical limit survives any density-zero spike set,
    so the trimmed mode is the natural estimator).
    """
    n = len(values)
    order = np.argsort(np.abs(values), kind="stable")
    drop = n // 100
    kept = values[order[drop : n - drop]] if n - 2 * drop >= 1 else values
    lo, hi = float(kept.min()), float(kept.max())
    cands = []
    if hi == lo:
        cands.append(lo)
    else:
        width = eps_min / 2.0
        nbins = int(math.ceil((hi - lo) / width))
        if nbins > max_bins:
            nbins = max_bins
        counts, edges = np.histogram(kept, bins=nbins, range=(lo, hi))
        # the median inside the heaviest bin is the sharpest estimate; it goes
        # first so score ties resolve toward it rather than a bin center
        top = int(np.argmax(counts))
        inbin = kept[(kept >= edges[top]) & (kept <= edges[top + 1])]
        if len(inbin):
            cands.append(float(np.median(inbin)))
        heavy = np.nonzero(counts >= 0.5 * len(kept))[0]
        centers = (edges[:-1] + edges[1:]) / 2.0
        cands.extend(float(c) for c in centers[heavy])
    cands.append(float(np.median(values[n // 2 :])))
    out = []
    for c in cands:
        if not any(abs(c - o) <= eps_min * 1e-9 + 1e-300 for o in out):
            out.append(c)
    return out


@dataclass(frozen=True)
class StatVerdict:
    """Per-epsilon deviation densities plus a convergence classification."""

    label: str
    horizon: int
    epsilon_grid: tuple
    limit: float | None
    deviation: dict
    classification: str
    evidence: dict = field(default_factory=dict)
    overflowed: bool = False

    def display(self) -> str:
        if self.classification == CLASS_CONVERGENT:
            return f"{CLASS_CONVERGENT}({self.limit:g})"
        return self.classification


def _deviation_grid(values, limit, eps_grid, zero_threshold, counting_floor):
    return {
        float(eps): deviation_report(values, limit, eps, zero_threshold, counting_floor)
        for eps in eps_grid
    }


def stat_limit(
    x,
    epsilon_grid=(0.5, 0.25),
    n: int | None = None,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
    min_horizon: int = DEFAULT_MIN_HORIZON,
    fixed_limit: float | None = None,
) -> StatVerdict:
    """Statistical-limit verdict for a prefix.

    Searches candidate limits by trimmed histogram mode (or checks only
    ``fixed_limit`` when given, as operator-error audits do) and declares
    convergence when every grid epsilon yields a zero-density deviation set.
    """
    eps_grid = tuple(sorted((float(e) for e in epsilon_grid), reverse=True))
    if not eps_grid or eps_grid[-1] <= 0:
        raise ValueError("epsilon grid must be nonempty and positive")
    values, overflowed = _values_of(x, n)
    if len(values) == 0:
        raise ValueError("empty prefix")
    label = getattr(x, "label", "")
    horizon = len(values)

    def make(limit, dev, classification, **ev):
        return StatVerdict(
            label=label,
            horizon=horizon,
            epsilon_grid=eps_grid,
            limit=limit,
            deviation=dev,
            classification=classification,
            evidence=ev,
            overflowed=overflowed,
        )

    if len(values) < min_horizon:
        if overflowed:
            # the tail escaped binary64 before the minimum horizon
            return make(None, {}, CLASS_DIVERGENT, overflow=True, representable=len(values))
        raise InvalidHorizonError(
            f"statistical verdicts need at least {min_horizon} terms, got {len(values)}"
        )

    candidates = (
        [float(fixed_limit)] if fixed_limit is not None
        else _candidate_limits(values, eps_grid[-1])
    )
    best = None
    for cand in candidates:
        dev = _deviation_grid(values, cand, eps_grid, zero_threshold, counting_floor)
        if all(r.verdict == VERDICT_ZERO for r in dev.values()):
            score = max(r.point_estimate for r in dev.values())
            if best is None or score < best[0]:
                best = (score, cand, dev)
    if best is not None and not overflowed:
        _, cand, dev = best
        return make(cand, dev, CLASS_CONVERGENT, candidates=candidates)

    # No candidate works (or the tail is unrepresentable): try to certify that
    # no limit can work at some grid epsilon.
    cert_eps, cert_frac = None, 0.0
    for eps in eps_grid:
        certified, frac = certified_no_limit(values, eps)
        if frac > cert_frac:
            cert_eps, cert_frac = eps, frac
        if certified:
            dev = _deviation_grid(values, candidates[0], eps_grid, zero_threshold, counting_floor)
            return make(
                None, dev, CLASS_DIVERGENT,
                candidates=candidates, certified_at_eps=eps, min_deviation_fraction=frac,
            )
    if overflowed:
        dev = _deviation_grid(values, candidates[0], eps_grid, zero_threshold, counting_floor)
        return make(None, dev, CLASS_DIVERGENT, candidates=candidates, overflow=True)

    dev = _deviation_grid(values, candidates[0], eps_grid, zero_threshold, counting_floor)
    cauchy = all(
        stat_cauchy(x, eps, n, zero_threshold=zero_threshold,
                    counting_floor=counting_floor, min_horizon=min_horizon).verdict == YES
        for eps in eps_grid
    )
    if cauchy:
        return make(None, dev, CLASS_CAUCHY_ONLY, candidates=candidates)
    bounded = stat_bounded(x, n, zero_threshold=zero_threshold,
                           counting_floor=counting_floor, min_horizon=min_horizon)
    if bounded.verdict == YES:
        return make(
            None, dev, CLASS_BOUNDED_ONLY,
            candidates=candidates, bound=bounded.bound,
            min_deviation_fraction=cert_frac, near_certified_eps=cert_eps,
        )
    return make(
        None, dev, CLASS_INCONCLUSIVE,
        candidates=candidates, min_deviation_fraction=cert_frac,
    )


@dataclass(frozen=True)
class CauchyVerdict:
    label: str
    eps: float
    verdict: str
    pivot_index: int | None
    pivot_value: float | None
    report: DensityReport | None


def stat_cauchy(
    x,
    eps: float,
    n: int | None = None,
    pivots: int = 32,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
    min_horizon: int = DEFAULT_MIN_HORIZON,
) -> CauchyVerdict:
    """Statistically-Cauchy verdict at one epsilon.

    Yes iff some pivot index makes {k : |x_k - x_pivot| >= eps} zero-density.
    Pivots are sampled from the last decile: for a genuinely statistically
    Cauchy sequence, late pivots land outside the exceptional set.
    """
    values, overflowed = _values_of(x, n)
    if overflowed:
        return CauchyVerdict(getattr(x, "label", ""), eps, NO, None, None, None)
    if len(values) < min_horizon:
        raise InvalidHorizonError(
            f"statistical verdicts need at least {min_horizon} terms, got {len(values)}"
        )
    m = len(values)
    idx = np.unique(np.linspace(int(m * 0.9), m - 1, num=pivots, dtype=int))
    best = None
    all_positive = True
    for i in idx:
        rep = deviation_report(values, float(values[i]), eps, zero_threshold, counting_floor)
        if rep.verdict == VERDICT_ZERO:
            return CauchyVerdict(getattr(x, "label", ""), eps, YES, int(i + 1), float(values[i]), rep)
        if rep.verdict != VERDICT_POSITIVE:
            all_positive = False
        if best is None or rep.tail_min < best[0]:
            best = (rep.tail_min, int(i + 1), float(values[i]), rep)
    verdict = NO if all_positive else INCONCLUSIVE
    return CauchyVerdict(getattr(x, "label", ""), eps, verdict, best[1], best[2], best[3])


@dataclass(frozen=True)
class BoundVerdict:
    label: str
    verdict: str
    bound: float | None
    report: DensityReport | None
    candidates: tuple


def bounded_by(
    x,
    bound: float,
    n: int | None = None,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
) -> DensityReport:
    """Admissibility probe: density report of {k : |x_k| > bound}."""
    values, _ = _values_of(x, n)
    ind = np.abs(values) > bound
    return report_from_indicator(
        ind, name=f"|x|>{bound:g}", zero_threshold=zero_threshold,
        counting_floor=counting_floor,
    )


def stat_bounded(
    x,
    n: int | None = None,
    candidates=None,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
    min_horizon: int = DEFAULT_MIN_HORIZON,
) -> BoundVerdict:
    """Statistically-bounded verdict: smallest admissible grid-searched bound.

    Candidate bounds come from magnitude quantiles of the first half of the
    prefix (plus a few small fixed values); a genuine statistical bound does
    not depend on the horizon, so candidates drawn from late data (which would
    trivially cover any finite prefix) are deliberately excluded.  An
    unrepresentable tail means the sequence escaped binary64: verdict no.
    """
    values, overflowed = _values_of(x, n)
    label = getattr(x, "label", "")
    if overflowed:
        return BoundVerdict(label, NO, None, None, ())
    if len(values) < min_horizon:
        raise InvalidHorizonError(
            f"statistical verdicts need at least {min_horizon} terms, got {len(values)}"
        )
    if candidates is None:
        half = np.abs(values[: len(values) // 2])
        qs = np.quantile(half, [0.5, 0.75, 0.9, 0.99, 1.0])
        candidates = sorted(set([0.0, 0.5, 1.0, 2.0, 5.0, 10.0] + [float(q) for q in qs]))
    else:
        candidates = sorted(float(c) for c in candidates)
    best = None
    for cand in candidates:  # deviation sets shrink as the bound grows
        rep = bounded_by(x, cand, n, zero_threshold, counting_floor)
        if rep.verdict == VERDICT_ZERO:
            best = (cand, rep)
            break
    if best is not None:
        return BoundVerdict(label, YES, best[0], best[1], tuple(candidates))
    # even the largest candidate (the first-half maximum) leaves a sizable
    # exceedance fraction: late terms escape every horizon-free bound
    top = bounded_by(x, candidates[-1], n, zero_threshold, counting_floor)
    verdict = NO if top.point_estimate > top.effective_threshold else INCONCLUSIVE
    return BoundVerdict(label, verdict, None, top, tuple(candidates))


def fib_stat_limit(
    x: SeqPrefix,
    cache: FibCache,
    epsilon_grid=(0.5, 0.25),
    n: int | None = None,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
    min_horizon: int = DEFAULT_MIN_HORIZON,
    fixed_limit: float | None = None,
) -> StatVerdict:
    """Statistical-limit verdict of the difference transform of ``x``.

    Overflowed transform tails are classified divergent (the tail escaped the
    representable range, which certainly is not a zero-density deviation).
    """
    y = fib_difference_transform(x, cache)
    return stat_limit(
        y, epsilon_grid, n, zero_threshold=zero_threshold,
        counting_floor=counting_floor, min_horizon=min_horizon, fixed_limit=fixed_limit,
    )


# --- sequence-space membership -------------------------------------------

MEMBERSHIP_TOL = 1e-6

SPACES = ("c", "c0", "linf", "S", "m0")
HAT_SPACES = ("c^", "c0^", "linf^", "S^", "m^", "m0^")


@dataclass(frozen=True)
class MembershipRecord:
    """Finite-horizon membership flags for the classic sequence spaces.

    Keys: c (convergent), c0 (null), linf (bounded), S (statistically
    convergent), m0 (statistically bounded and statistically convergent);
    the ^-suffixed keys apply the same test to the difference transform.
    Every flag is yes/no/inconclusive with numeric evidence alongside.
    """

    label: str
    horizon: int
    flags: dict
    evidence: dict

    def implication_violations(self) -> list:
        """Flag-level consistency: c implies S, S implies m0-boundedness etc."""
        out = []
        pairs = [("c", "S"), ("c^", "S^")]
        for a, b in pairs:
            if self.flags.get(a) == YES and self.flags.get(b) == NO:
                out.append(f"{a}=yes but {b}=no")
        if self.flags.get("S") == YES and self.flags.get("m0") == NO:
            out.append("S=yes but m0=no")
        return out


def _tail_oscillation(values: np.ndarray) -> float:
    tail = values[len(values) // 2 :]
    return float(np.abs(tail - values[-1]).max())


def _gray(value: float, tol: float) -> str:
    if value <= tol:
        return YES
    if value <= 10 * tol:
        return INCONCLUSIVE
    return NO


def _plain_flags(values, overflowed, eps_grid, zero_threshold, counting_floor, min_horizon, tol):
    flags, ev = {}, {}
    if overflowed:
        flags["c"] = flags["c0"] = flags["linf"] = NO
        ev["overflow"] = True
    else:
        osc = _tail_oscillation(values)
        flags["c"] = _gray(osc, tol)
        ev["tail_oscillation"] = osc
        ev["last_value"] = float(values[-1])
        flags["c0"] = flags["c"] if abs(values[-1]) <= tol else (
            NO if flags["c"] == YES else flags["c"]
        )
        m = len(values)
        w2 = float(np.abs(values[m // 2 :]).max())
        w1 = float(np.abs(values[m // 4 : m // 2]).max())
        ev["window_max_late"] = w2
        ev["window_max_mid"] = w1
        # 1.5: a doubling factor of exactly 2 would pass linear growth
        flags["linf"] = YES if w2 <= max(1.5 * w1, tol) else NO
    return flags, ev


def space_membership(
    x: SeqPrefix,
    cache: FibCache,
    n: int | None = None,
    epsilon_grid=(0.5, 0.25),
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
    min_horizon: int = DEFAULT_MIN_HORIZON,
    tol: float = MEMBERSHIP_TOL,
) -> MembershipRecord:
    """Classify a prefix against the plain and transform-composed spaces."""
    values, overflowed = _values_of(x, n)
    flags, ev = _plain_flags(values, overflowed, epsilon_grid, zero_threshold,
                             counting_floor, min_horizon, tol)

    sv = stat_limit(x, epsilon_grid, n, zero_threshold, counting_floor, min_horizon)
    flags["S"] = YES if sv.classification == CLASS_CONVERGENT else (
        NO if sv.classification == CLASS_DIVERGENT else INCONCLUSIVE
    )
    ev["S"] = sv.display()
    bv = stat_bounded(x, n, zero_threshold=zero_threshold,
                      counting_floor=counting_floor, min_horizon=min_horizon)
    ev["stat_bound"] = bv.bound
    flags["m0"] = YES if (bv.verdict == YES and flags["S"] == YES) else (
        NO if (bv.verdict == NO or flags["S"] == NO) else INCONCLUSIVE
    )

    y = fib_difference_transform(x, cache).as_prefix(f"transform({x.label})")
    tvalues, toverflowed = _values_of(y, n)
    hat, hev = _plain_flags(tvalues, toverflowed, epsilon_grid, zero_threshold,
                            counting_floor, min_horizon, tol)
    for k, v in hat.items():
        flags[f"{k}^"] = v
    for k, v in hev.items():
        ev[f"{k}^"] = v
    tsv = stat_limit(y, epsilon_grid, n, zero_threshold, counting_floor, min_horizon)
    flags["S^"] = YES if tsv.classification == CLASS_CONVERGENT else (
        NO if tsv.classification == CLASS_DIVERGENT else INCONCLUSIVE
    )
    ev["S^"] = tsv.display()
    tbv = stat_bounded(y, n, zero_threshold=zero_threshold,
                       counting_floor=counting_floor, min_horizon=min_horizon)
    flags["m^"] = tbv.verdict
    ev["m^_bound"] = tbv.bound
    flags["m0^"] = YES if (tbv.verdict == YES and flags["S^"] == YES) else (
        NO if (tbv.verdict == NO or flags["S^"] == NO) else INCONCLUSIVE
    )
    return MembershipRecord(label=x.label, horizon=len(values), flags=flags, evidence=ev)


# --- implication audit -----------------------------------------------------


@dataclass(frozen=True)
class ImplicationRow:
    label: str
    stat_class: str
    stat_limit: float | None
    cauchy_ok: bool | None
    bounded_ok: bool | None
    fib_class: str
    fib_limit: float | None
    fib_cauchy_ok: bool | None
    mutation_same: bool | None


@dataclass(frozen=True)
class ImplicationReport:
    horizon: int
    rows: tuple
    violations: tuple

    @property
    def all_ok(self) -> bool:
        return not self.violations


def default_corpus(n: int) -> list:
    """The witness prefixes plus a constant, at a common horizon."""
    corpus = [witness(name, n) for name in WITNESS_NAMES]
    corpus.append(SeqPrefix.from_values(np.full(n, 1.0), label="const-1"))
    return corpus


def implication_audit(
    corpus,
    cache: FibCache,
    n: int | None = None,
    epsilon_grid=(0.5, 0.25),
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    counting_floor: float = DEFAULT_COUNTING_FLOOR,
    min_horizon: int = DEFAULT_MIN_HORIZON,
) -> ImplicationReport:
    """Check, on every corpus member, the implications the theory promises.

    * statistically convergent  =>  statistically Cauchy (every grid eps)
    * statistically convergent  =>  statistically bounded
    * transform-statistically convergent => transform-statistically Cauchy
    * perturbing the transformed sequence on a density-zero index set must
      not change its statistical verdict.

    Violations are report content, not exceptions.
    """
    if not corpus:
        raise ValueError("empty corpus")
    rows, violations = [], []
    for x in corpus:
        sv = stat_limit(x, epsilon_grid, n, zero_threshold, counting_floor, min_horizon)
        cauchy_ok = bounded_ok = None
        if sv.classification == CLASS_CONVERGENT:
            cauchy_ok = all(
                stat_cauchy(x, eps, n, zero_threshold=zero_threshold,
                            counting_floor=counting_floor, min_horizon=min_horizon).verdict == YES
                for eps in sv.epsilon_grid
            )
            bounded_ok = stat_bounded(
                x, n, zero_threshold=zero_threshold,
                counting_floor=counting_floor, min_horizon=min_horizon,
            ).verdict == YES
            if not cauchy_ok:
                violations.append(f"{x.label}: stat-convergent but not stat-Cauchy")
            if not bounded_ok:
                violations.append(f"{x.label}: stat-convergent but not stat-bounded")

        y = fib_difference_transform(x, cache).as_prefix(f"transform({x.label})")
        fv = stat_limit(y, epsilon_grid, n, zero_threshold, counting_floor, min_horizon)
        fib_cauchy_ok = mutation_same = None
        if fv.classification == CLASS_CONVERGENT:
            fib_cauchy_ok = all(
                stat_cauchy(y, eps, n, zero_threshold=zero_threshold,
                            counting_floor=counting_floor, min_horizon=min_horizon).verdict == YES
                for eps in fv.epsilon_grid
            )
            if not fib_cauchy_ok:
                violations.append(
                    f"{x.label}: transform-stat-convergent but not transform-stat-Cauchy"
                )
            # mutate the transformed sequence on the squares (density zero)
            tvals, toverflow = _values_of(y, n)
            mutated = tvals.copy()
            roots = np.arange(1, math.isqrt(len(mutated)) + 1)
            mutated[roots * roots - 1] += 5.0
            mv = stat_limit(
                SeqPrefix(terms=mutated, label=f"{y.label}+spikes"),
                epsilon_grid, None, zero_threshold, counting_floor, min_horizon,
            )
            mutation_same = (
                mv.classification == fv.classification
                and (mv.limit is None or fv.limit is None or
                     abs(mv.limit - fv.limit) <= epsilon_grid[-1] / 2)
            )
            if not mutation_same:
                violations.append(
                    f"{x.label}: zero-density mutation changed the transform verdict "
                    f"({fv.display()} -> {mv.display()})"
                )
        rows.append(ImplicationRow(
            label=x.label,
            stat_class=sv.classification,
            stat_limit=sv.limit,
            cauchy_ok=cauchy_ok,
            bounded_ok=bounded_ok,
            fib_class=fv.classification,
            fib_limit=fv.limit,
            fib_cauchy_ok=fib_cauchy_ok,
            mutation_same=mutation_same,
        ))
    horizon = n if n is not None else max(x.horizon for x in corpus)
    return ImplicationReport(horizon=horizon, rows=tuple(rows), violations=tuple(violations))
