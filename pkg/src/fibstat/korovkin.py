"""2pi-periodic grid functions, Fejer operators, and the Korovkin audit.

Grid functions live on M uniform nodes x_j = -pi + 2 pi j / M and are treated
cyclically by every norm and quadrature.  Trapezoid quadrature on a uniform
periodic grid integrates trigonometric polynomials below the Nyquist degree
exactly, so Fourier coefficients of low harmonics come out to machine
precision.

The audit builds error sequences e_k(g) = ||L_k(g) - g|| for the three test
functions 1, sin, cos and for approximation targets, then classifies each
sequence under classical, statistical, and transform-statistical convergence
to zero, and checks the observed data against the equivalence

    (all three test errors -> 0)  <=>  (all target errors -> 0)

in each sense.  The audit never asserts the expected outcome; it computes and
reports, and disagreements become discrepancy records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .fibonacci import FibCache, IntegrityError, InvalidHorizonError
from .sequences import SeqPrefix, fib_difference_transform
from .statconv import (
    CLASS_CONVERGENT,
    CLASS_DIVERGENT,
    StatVerdict,
    stat_limit,
)

DEFAULT_GRID = 1024

CONVERGENT = "convergent"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"

_BASIS_CACHE: dict = {}


def _nodes(m: int) -> np.ndarray:
    return -np.pi + 2.0 * np.pi * np.arange(m) / m


def _basis(m: int, kmax: int):
    """Cached cos(k x_j), sin(k x_j) matrices for k = 0..kmax."""
    key = (m, kmax)
    hit = _BASIS_CACHE.get(key)
    if hit is None:
        k = np.arange(kmax + 1)
        kx = np.outer(k, _nodes(m))
        hit = (np.cos(kx), np.sin(kx))
        _BASIS_CACHE[key] = hit
    return hit


@dataclass(frozen=True)
class GridFunction:
    """A 2pi-periodic function sampled on M uniform nodes (M a power of two)."""

    samples: np.ndarray

    def __post_init__(self):
        m = len(self.samples)
        if m < 4 or m & (m - 1):
            raise ValueError(f"grid size must be a power of two >= 4, got {m}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("grid samples must be finite")

    @property
    def m(self) -> int:
        return len(self.samples)

    def nodes(self) -> np.ndarray:
        return _nodes(self.m)

    @classmethod
    def from_callable(cls, f: Callable, m: int = DEFAULT_GRID) -> "GridFunction":
        return cls(samples=np.asarray(f(_nodes(m)), dtype=float))

    @classmethod
    def constant(cls, c: float, m: int = DEFAULT_GRID) -> "GridFunction":
        return cls(samples=np.full(m, float(c)))


TARGET_NAMES = ("one", "sin", "cos", "sin2", "abs-sin", "sawtooth-smooth")


def preset_target(name: str, m: int = DEFAULT_GRID) -> GridFunction:
    """Named 2pi-periodic targets for audits."""
    x = _nodes(m)
    if name == "one":
        return GridFunction(np.ones(m))
    if name == "sin":
        return GridFunction(np.sin(x))
    if name == "cos":
        return GridFunction(np.cos(x))
    if name == "sin2":
        return GridFunction(np.sin(x) ** 2)
    if name == "abs-sin":
        return GridFunction(np.abs(np.sin(x)))
    if name == "sawtooth-smooth":
        # first eight harmonics of the sawtooth: smooth, mixed-sign spectrum
        y = np.zeros(m)
        for j in range(1, 9):
            y += 2.0 * (-1.0) ** (j + 1) * np.sin(j * x) / j
        return GridFunction(y)
    raise ValueError(f"unknown target {name!r}; known: {', '.join(TARGET_NAMES)}")


def sup_norm_2pi(f: GridFunction) -> float:
    """Grid sup-norm max_j |f(x_j)| (misses an interior peak by O((pi/M)^2))."""
    return float(np.abs(f.samples).max())


@dataclass(frozen=True)
class FourierCoeffs:
    """Trapezoid-quadrature Fourier coefficients a_0..a_n and b_1..b_n."""

    a: np.ndarray  # a[k], k = 0..n
    b: np.ndarray  # b[k], k = 0..n with b[0] = 0

    @property
    def order(self) -> int:
        return len(self.a) - 1


def fourier_coeffs(f: GridFunction, n: int) -> FourierCoeffs:
    """Trapezoid-quadrature coefficients up to order n, computed by FFT.

    On the -pi-based grid the DFT bins carry a (-1)^k phase.  The FFT is
    arithmetically identical to the quadrature sums but yields exact zeros
    for constant input, so means of partial sums fix constants exactly.
    """
    if n >= f.m // 2:
        raise InvalidHorizonError(f"order {n} aliases on an M={f.m} grid (need n < M/2)")
    spectrum = np.fft.rfft(f.samples)[: n + 1]
    sign = (-1.0) ** np.arange(n + 1)
    a = sign * 2.0 * spectrum.real / f.m
    b = -sign * 2.0 * spectrum.imag / f.m
    b[0] = 0.0
    return FourierCoeffs(a=a, b=b)


def _harmonic_terms(f: GridFunction, n: int) -> np.ndarray:
    """Rows t_k(x_j): t_0 = a_0/2, t_k = a_k cos kx + b_k sin kx."""
    c = fourier_coeffs(f, n)
    cosb, sinb = _basis(f.m, n)
    terms = c.a[:, None] * cosb + c.b[:, None] * sinb
    terms[0] = c.a[0] / 2.0
    return terms


def fourier_partial_sum(f: GridFunction, n: int) -> GridFunction:
    """S_n(f) evaluated on the grid from quadrature coefficients."""
    return GridFunction(_harmonic_terms(f, n).sum(axis=0))


def all_fejer_means(f: GridFunction, kmax: int) -> np.ndarray:
    """Rows k = 0..kmax of the Fejer means (arithmetic means of S_0..S_k)."""
    terms = _harmonic_terms(f, kmax)
    partial = np.cumsum(terms, axis=0)
    return np.cumsum(partial, axis=0) / (np.arange(kmax + 1)[:, None] + 1.0)


def fejer_kernel(n: int, s: np.ndarray) -> np.ndarray:
    """The nonnegative kernel sin^2((n+1)s/2) / ((n+1) sin^2(s/2)).

    The removable singularity at s = 0 (mod 2pi) evaluates to n + 1.
    """
    s = np.asarray(s, dtype=float)
    half = np.mod(s, 2.0 * np.pi) / 2.0
    sh = np.sin(half)
    singular = np.abs(sh) < 1e-15
    num = np.sin((n + 1) * half) ** 2
    den = (n + 1) * sh**2
    out = np.divide(num, den, out=np.full_like(s, float(n + 1)), where=~singular)
    return out


def fejer_mean(f: GridFunction, n: int, method: str = "average") -> GridFunction:
    """Fejer mean of order n.

    ``average`` takes the literal arithmetic mean of the partial sums
    S_0..S_n; ``kernel`` evaluates the convolution (1/2pi) integral of f
    against the kernel by trapezoid quadrature (a cyclic convolution,
    computed via FFT).  The two agree to rounding error.
    """
    if n >= f.m // 2:
        raise InvalidHorizonError(f"order {n} aliases on an M={f.m} grid (need n < M/2)")
    if method == "average":
        return GridFunction(all_fejer_means(f, n)[n])
    if method == "kernel":
        d = np.arange(f.m) * (2.0 * np.pi / f.m)
        ker = fejer_kernel(n, d)
        conv = np.fft.irfft(np.fft.rfft(f.samples) * np.fft.rfft(ker), f.m)
        return GridFunction(conv / f.m)
    raise ValueError(f"unknown method {method!r}")


# --- operator families ------------------------------------------------------


@dataclass(frozen=True)
class OperatorFamily:
    """An indexed family k -> L_k of operators on grid functions.

    ``constant_scale(k)`` optionally returns the exact factor (int/Fraction)
    with L_k(1) = constant_scale(k); audits use it for exact error
    bookkeeping when the measured action on constants confirms it.
    ``apply_all(kmax, f)``, when present, returns the stacked samples of
    L_1(f)..L_kmax(f) in one pass; spot checks verify it against ``apply``.
    """

    name: str
    apply: Callable[[int, GridFunction], GridFunction]
    claimed_positive: bool = True
    constant_scale: Callable[[int], object] | None = None
    apply_all: Callable[[int, GridFunction], np.ndarray] | None = None


def fejer_family() -> OperatorFamily:
    return OperatorFamily(
        name="fejer",
        apply=lambda k, f: fejer_mean(f, k, method="average"),
        claimed_positive=True,
        constant_scale=lambda k: 1,
        apply_all=lambda kmax, f: all_fejer_means(f, kmax)[1:],
    )


def identity_family() -> OperatorFamily:
    return OperatorFamily(
        name="identity",
        apply=lambda k, f: f,
        claimed_positive=True,
        constant_scale=lambda k: 1,
    )


def partial_sum_family() -> OperatorFamily:
    """Fourier partial sums: linear but NOT positive (audit abort fixture)."""
    return OperatorFamily(
        name="partial-sum",
        apply=lambda k, f: fourier_partial_sum(f, k),
        claimed_positive=True,  # deliberately wrong; the spot check must catch it
        constant_scale=lambda k: 1,
    )


def scaled_fejer_family(y: SeqPrefix, name: str = "scaled-fejer") -> OperatorFamily:
    """Fejer means inflated by (1 + y_k): positive since 1 + y_k > 0.

    With y the squared-Fibonacci witness this is the classic example of a
    family that fails classical and plain statistical Korovkin conditions
    while its constant-function error is transform-statistically null.
    """
    if y.exact is None:
        raise ValueError("the scale sequence must carry exact terms")

    def scale(k: int):
        if k < 1 or k > y.horizon:
            raise InvalidHorizonError(f"scale index {k} outside 1..{y.horizon}")
        return 1 + y.exact[k - 1]

    def apply(k: int, f: GridFunction) -> GridFunction:
        return GridFunction(float(scale(k)) * fejer_mean(f, k, method="average").samples)

    def apply_all(kmax: int, f: GridFunction) -> np.ndarray:
        factors = np.array([float(scale(k)) for k in range(1, kmax + 1)])
        return factors[:, None] * all_fejer_means(f, kmax)[1:]

    return OperatorFamily(
        name=name, apply=apply, claimed_positive=True,
        constant_scale=scale, apply_all=apply_all,
    )


def fib_scaled_fejer_family(kmax: int) -> OperatorFamily:
    """The (1 + f_{k+1}^2)-scaled Fejer family up to index kmax."""
    from .sequences import witness

    return scaled_fejer_family(witness("fib-squares", kmax), name="fib-fejer")


@dataclass(frozen=True)
class SpotCheckReport:
    family: str
    indices: tuple
    linearity_residual: float
    positivity_floor: float
    batch_residual: float
    positive_ok: bool
    linear_ok: bool
    batch_ok: bool


def _positivity_probes(m: int, rng, trials: int):
    """Nonnegative test inputs: random smooth bumps plus sharp box/spike probes.

    The sharp probes matter; smooth random functions never expose the Gibbs
    undershoot of non-positive operators like raw Fourier partial sums.
    """
    x = _nodes(m)
    probes = [
        (np.abs(x) <= 0.3).astype(float),            # narrow box
        (np.abs(x - 1.5) <= 0.8).astype(float),      # offset box
        np.maximum(0.0, 1.0 - np.abs(x) / 0.2),      # spike
        ((1.0 + np.cos(x)) / 2.0) ** 8,              # concentrated bump
    ]
    for _ in range(trials):
        a = rng.normal(size=5)
        b = rng.normal(size=5)
        y = np.zeros(m)
        for j in range(5):
            y += a[j] * np.cos((j + 1) * x) + b[j] * np.sin((j + 1) * x)
        probes.append(y - y.min())
    return probes


def operator_spot_checks(
    family: OperatorFamily,
    indices=(1, 2, 5, 13, 33),
    m: int = DEFAULT_GRID,
    trials: int = 4,
    seed: int = 20260810,
) -> SpotCheckReport:
    """Linearity and (claimed) positivity checks on seeded inputs.

    Positivity tolerance scales with the measured action on constants so
    exactly-scaled families are judged relative to their own magnitude.  When
    the family supplies a batched ``apply_all`` it is cross-checked against
    per-index ``apply``.
    """
    rng = np.random.default_rng(seed)
    lin_res = 0.0
    pos_floor = 0.0
    batch_res = 0.0
    x = _nodes(m)
    probes = _positivity_probes(m, rng, trials)

    def random_fn():
        a = rng.normal(size=5)
        b = rng.normal(size=5)
        y = np.zeros(m)
        for j in range(5):
            y += a[j] * np.cos((j + 1) * x) + b[j] * np.sin((j + 1) * x)
        return y

    batch = None
    if family.apply_all is not None:
        batch = family.apply_all(max(indices), GridFunction(probes[-1]))

    for k in indices:
        scale = sup_norm_2pi(family.apply(k, GridFunction.constant(1.0, m)))
        for _ in range(trials):
            fa, fb = random_fn(), random_fn()
            al, be = rng.uniform(-3, 3), rng.uniform(-3, 3)
            lhs = family.apply(k, GridFunction(al * fa + be * fb)).samples
            rhs = al * family.apply(k, GridFunction(fa)).samples + be * family.apply(
                k, GridFunction(fb)
            ).samples
            denom = max(1.0, np.abs(rhs).max())
            lin_res = max(lin_res, float(np.abs(lhs - rhs).max() / denom))
        if family.claimed_positive:
            for g in probes:
                out = family.apply(k, GridFunction(g)).samples
                pos_floor = min(pos_floor, float(out.min() / max(1.0, scale)))
        if batch is not None:
            ref = family.apply(k, GridFunction(probes[-1])).samples
            denom = max(1.0, np.abs(ref).max())
            batch_res = max(batch_res, float(np.abs(batch[k - 1] - ref).max() / denom))
    return SpotCheckReport(
        family=family.name,
        indices=tuple(indices),
        linearity_residual=lin_res,
        positivity_floor=pos_floor,
        batch_residual=batch_res,
        positive_ok=(not family.claimed_positive) or pos_floor >= -1e-10,
        linear_ok=lin_res <= 1e-10,
        batch_ok=batch_res <= 1e-10,
    )


def second_moment(family: OperatorFamily, k: int, m: int = DEFAULT_GRID) -> GridFunction:
    """L_k applied to t -> sin^2((t - x)/2), evaluated at every grid x.

    Uses the three-test-function decomposition

        (1/2) [ L_k(1, x) - cos x L_k(cos t, x) - sin x L_k(sin t, x) ]

    so the family only ever has to act on single functions, never on
    x-dependent integrands.
    """
    x = _nodes(m)
    l1 = family.apply(k, GridFunction.constant(1.0, m)).samples
    lc = family.apply(k, GridFunction(np.cos(x))).samples
    ls = family.apply(k, GridFunction(np.sin(x))).samples
    return GridFunction(0.5 * (l1 - np.cos(x) * lc - np.sin(x) * ls))


# --- the audit --------------------------------------------------------------


@dataclass(frozen=True)
class SequenceAudit:
    """One error sequence with its three convergence-to-zero verdicts."""

    name: str
    errors: np.ndarray
    exact: bool
    classical: str
    statistical: str
    fib_statistical: str
    transformed: np.ndarray
    transform_overflow_at: int | None
    final_error: float
    stat_verdict: StatVerdict
    fib_verdict: StatVerdict


@dataclass(frozen=True)
class KorovkinReport:
    family: str
    kmax: int
    m: int
    epsilon_grid: tuple
    classical_tol: float
    spot_checks: SpotCheckReport
    test_audits: dict      # name -> SequenceAudit for 1, sin, cos
    target_audits: dict    # name -> SequenceAudit
    implications: dict     # sense -> {conditions, targets, consistent, note}

    def condition_sequences(self):
        return {name: audit.errors for name, audit in self.test_audits.items()}


def _classical_verdict(errors: np.ndarray, tol: float):
    k = len(errors)
    last = errors[k // 2 :]
    mid = errors[k // 4 : k // 2]
    final = float(errors[-1])
    if final <= tol and float(last.max()) <= float(mid.max()) + 1e-12:
        return CONVERGENT, final
    if float(last.min()) > tol:
        return DIVERGENT, final
    return INCONCLUSIVE, final


def _stat_sense(verdict: StatVerdict) -> str:
    if verdict.classification == CLASS_CONVERGENT:
        return CONVERGENT
    if verdict.classification == CLASS_DIVERGENT:
        return DIVERGENT
    return INCONCLUSIVE


def _error_prefix(family, gf, name, kmax, exact_target_one):
    """Error sequence e_k = ||L_k(gf) - gf|| for k = 1..kmax as a SeqPrefix.

    For the constant test function on an exactly-scaled family the sequence
    is recorded exactly as |scale_k - 1| once the measured action agrees to
    1e-12; the transform of such sequences must be computed exactly because
    their float noise is amplified by the huge scale.
    """
    if family.apply_all is not None:
        rows = family.apply_all(kmax, gf)
        measured = np.abs(rows - gf.samples).max(axis=1)
    else:
        measured = np.empty(kmax)
        for k in range(1, kmax + 1):
            out = family.apply(k, gf).samples
            measured[k - 1] = float(np.abs(out - gf.samples).max())
    if exact_target_one and family.constant_scale is not None:
        exact = [abs(family.constant_scale(k) - 1) for k in range(1, kmax + 1)]
        rendered, overflow_at = _render_exact(exact)
        if overflow_at is None and np.allclose(
            measured, rendered, rtol=1e-12, atol=1e-12
        ):
            return SeqPrefix.from_exact(exact, label=f"e[{name}]"), True
    return SeqPrefix.from_values(measured, label=f"e[{name}]"), False


def _render_exact(exact):
    out = []
    for i, v in enumerate(exact):
        try:
            fv = float(v)
        except OverflowError:
            return np.array(out), i + 1
        out.append(fv)
    return np.array(out), None


def _audit_sequence(
    family, gf, name, kmax, cache, eps_grid, zero_threshold, classical_tol, is_one
):
    prefix, exact = _error_prefix(family, gf, name, kmax, is_one)
    errors = prefix.terms
    if len(errors) == kmax:
        classical, tail = _classical_verdict(errors, classical_tol)
    else:  # the error sequence itself escaped binary64
        classical, tail = DIVERGENT, float("inf")
    sv = stat_limit(
        prefix, eps_grid, zero_threshold=zero_threshold, min_horizon=64, fixed_limit=0.0
    )
    t = fib_difference_transform(prefix, cache)
    fv = stat_limit(
        t, eps_grid, zero_threshold=zero_threshold, min_horizon=64, fixed_limit=0.0
    )
    return SequenceAudit(
        name=name,
        errors=errors,
        exact=exact,
        classical=classical,
        statistical=_stat_sense(sv),
        fib_statistical=_stat_sense(fv),
        transformed=t.terms,
        transform_overflow_at=t.overflow_at,
        final_error=tail,
        stat_verdict=sv,
        fib_verdict=fv,
    )


def korovkin_audit(
    family: OperatorFamily,
    targets,
    kmax: int,
    cache: FibCache,
    epsilon_grid=(0.5, 0.25),
    zero_threshold: float = 0.005,
    classical_tol: float = 0.02,
    m: int = DEFAULT_GRID,
    spot_seed: int = 20260810,
) -> KorovkinReport:
    """Audit a positive linear operator family against the three-function test.

    ``targets`` maps names to GridFunctions.  Requires kmax >= 100 (shorter
    horizons say nothing about density verdicts) and a Fibonacci cache of at
    least kmax + 2 terms.  Aborts with IntegrityError if the family fails its
    linearity or positivity spot checks.
    """
    if kmax < 100:
        raise InvalidHorizonError(f"audit needs kmax >= 100, got {kmax}")
    if cache.n < kmax + 2:
        raise InvalidHorizonError(
            f"audit at kmax={kmax} needs a cache of {kmax + 2} Fibonacci numbers"
        )
    checks = operator_spot_checks(family, m=m, seed=spot_seed)
    if not checks.linear_ok:
        raise IntegrityError(
            f"family {family.name} failed the linearity spot check "
            f"(residual {checks.linearity_residual:.3e})"
        )
    if not checks.positive_ok:
        raise IntegrityError(
            f"family {family.name} claims positivity but produced "
            f"{checks.positivity_floor:.3e} on a nonnegative input"
        )
    if not checks.batch_ok:
        raise IntegrityError(
            f"family {family.name}: batched application disagrees with per-index "
            f"application (residual {checks.batch_residual:.3e})"
        )

    x = _nodes(m)
    tests = {
        "one": GridFunction(np.ones(m)),
        "sin": GridFunction(np.sin(x)),
        "cos": GridFunction(np.cos(x)),
    }
    eps_grid = tuple(sorted((float(e) for e in epsilon_grid), reverse=True))
    test_audits = {
        name: _audit_sequence(
            family, gf, name, kmax, cache, eps_grid, zero_threshold, classical_tol,
            is_one=(name == "one"),
        )
        for name, gf in tests.items()
    }
    target_audits = {
        name: _audit_sequence(
            family, gf, name, kmax, cache, eps_grid, zero_threshold, classical_tol,
            is_one=False,
        )
        for name, gf in targets.items()
    }

    implications = {}
    for sense in ("classical", "statistical", "fib_statistical"):
        conds = {n: getattr(a, sense) for n, a in test_audits.items()}
        targs = {n: getattr(a, sense) for n, a in target_audits.items()}
        conds_hold = all(v == CONVERGENT for v in conds.values())
        conds_fail = any(v == DIVERGENT for v in conds.values())
        targs_hold = bool(targs) and all(v == CONVERGENT for v in targs.values())
        targs_fail = any(v == DIVERGENT for v in targs.values())
        consistent = not (conds_hold and targs_fail) and not (targs_hold and conds_fail)
        implications[sense] = {
            "conditions": conds,
            "targets": targs,
            "conditions_hold": conds_hold,
            "targets_hold": targs_hold,
            "consistent": consistent,
        }
    return KorovkinReport(
        family=family.name,
        kmax=kmax,
        m=m,
        epsilon_grid=eps_grid,
        classical_tol=classical_tol,
        spot_checks=checks,
        test_audits=test_audits,
        target_audits=target_audits,
        implications=implications,
    )
