"""Exact and approximate confidence methods for a binomial proportion.

Clopper-Pearson intervals and bounds, Wald/Wilson/Agresti-Coull/Bayesian
competitors, asymptotic expansions of the exact bounds and of their expected
length, an exact enumeration engine for width and coverage, and sample-size
and cost-of-exactness calculators.
"""

from .errors import (
    BinomciError,
    CalibrationError,
    ConvergenceError,
    DomainError,
    SearchBudgetError,
    UnsupportedSideError,
)
from .exact_eval import (
    CoverageReport,
    MeanCoverage,
    MinCoverage,
    PGrid,
    calibrate_alpha,
    coverage_probability,
    expected_width_exact,
    mean_coverage,
    min_coverage,
)
from .expansions import (
    ExpansionOrder,
    ExpansionTerms,
    cp_bound_expansion,
    excess_distance_one_sided,
    excess_length,
    expected_distance_expansion,
    expected_length_expansion,
)
from .methods import (
    ApproxFamily,
    ConfidenceLevel,
    Family,
    IntervalEstimate,
    MethodSpec,
    Observation,
    Side,
    agresti_coull_interval,
    beta_prior_interval,
    clopper_pearson_bound,
    clopper_pearson_interval,
    interval,
    wald_interval,
    wilson_interval,
)
from .sample_size import (
    FormulaMode,
    SampleSizeQuery,
    SampleSizeResult,
    approx_method_n,
    cp_n_one_sided,
    cp_n_one_sided_prior,
    cp_n_two_sided,
    cp_n_two_sided_prior,
    exact_n,
    n_plus_adjusted,
    n_plus_one_sided,
    n_plus_two_sided,
    prior_moment,
)
from .special import (
    BetaParams,
    JEFFREYS_PRIOR,
    UNIFORM_PRIOR,
    beta_quantile,
    binom_cdf,
    binom_pmf,
    log_gamma,
    normal_quantile,
    reg_inc_beta,
)

__version__ = "0.1.0"
