"""Fibonacci-difference statistical convergence toolkit.

Exact Fibonacci arithmetic, the bidiagonal ratio difference transform,
natural-density estimation, statistical convergence verdicts, a Fejer-based
Korovkin audit harness, and rate-of-convergence analysis, with a batch CLI
that renders figures next to its CSV/JSON reports.
"""

from .fibonacci import (
    GOLDEN_RATIO,
    FibCache,
    IdentityReport,
    IntegrityError,
    InvalidHorizonError,
    build_fib_cache,
    identity_audit,
    ratios,
)
from .sequences import (
    SeqPrefix,
    TransformResult,
    fib_difference_transform,
    frechet_distance,
    inverse_transform,
    witness,
    WITNESS_NAMES,
)
from .density import (
    DensityReport,
    IndexSet,
    axiom_suite,
    counting_function,
    density_estimate,
    named_sets,
)
from .statconv import (
    MembershipRecord,
    StatVerdict,
    bounded_by,
    default_corpus,
    fib_stat_limit,
    implication_audit,
    space_membership,
    stat_bounded,
    stat_cauchy,
    stat_limit,
)
from .korovkin import (
    GridFunction,
    KorovkinReport,
    OperatorFamily,
    fejer_family,
    fejer_kernel,
    fejer_mean,
    fib_scaled_fejer_family,
    fourier_coeffs,
    fourier_partial_sum,
    korovkin_audit,
    preset_target,
    scaled_fejer_family,
    second_moment,
    sup_norm_2pi,
)
from .rates import (
    RateWeights,
    modulus_of_continuity,
    operator_rate_bound_audit,
    rate_algebra_check,
    rate_verdict,
    theta_sequence,
    weight_preset,
)

__version__ = "0.1.0"
