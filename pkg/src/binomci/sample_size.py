"""Sample-size determination and cost-of-exactness calculators.

Closed forms for the sample size that gives the Clopper-Pearson methods a
target expected length (two-sided) or expected distance to p (one-sided),
prior-averaged variants, the printed sample-size formulas for the
approximate comparison methods, an exact enumeration search, and the
n-plus quantities measuring how many extra observations exactness costs.

Several printed displays disagree with their own derivations; those
operations therefore run in one of two modes.  DERIVED_ALGEBRA (the
default) evaluates the algebraically consistent form, PAPER_VERBATIM the
display exactly as typeset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from . import exact_eval
from .errors import DomainError, SearchBudgetError
from .methods import ApproxFamily, ConfidenceLevel, Family, MethodSpec, Side
from .special import BetaParams, log_gamma, normal_quantile


class FormulaMode(Enum):
    DERIVED_ALGEBRA = "derived"
    PAPER_VERBATIM = "paper"


@dataclass(frozen=True)
class SampleSizeQuery:
    """Target width/distance d with either a point guess p0 or a Beta prior.

    Two-sided queries interpret d as a full expected length; one-sided
    queries interpret it as the expected distance from the upper bound to p,
    which also reads as an error tolerance.
    """

    d: float
    level: ConfidenceLevel
    side: Side = Side.TWO_SIDED
    p0: float | None = None
    prior: BetaParams | None = None

    def __post_init__(self):
        if not (0.0 < self.d < 1.0):
            raise DomainError(f"target d must be in (0, 1), got {self.d}")
        if self.side is Side.LOWER:
            raise DomainError("sample-size queries take side two-sided or upper")
        if (self.p0 is None) == (self.prior is None):
            raise DomainError("exactly one of p0 and prior must be given")
        if self.p0 is not None and not (0.0 < self.p0 < 1.0):
            raise DomainError(f"p0 must be in (0, 1), got {self.p0}")


@dataclass(frozen=True)
class SampleSizeResult:
    n: int
    n_unrounded: float
    formula: FormulaMode
    achieved: float | None = None

    def __post_init__(self):
        if self.n != math.ceil(self.n_unrounded):
            raise DomainError("n must be the ceiling of n_unrounded")


def prior_moment(prior: BetaParams) -> float:
    """Mean of sqrt(p(1-p)) under a Beta(a, b) prior.

    Equals Gamma(a+1/2) Gamma(b+1/2) / ((a+b) Gamma(a) Gamma(b)); for the
    Jeffreys, uniform and Beta(2, 2) priors this is 1/pi, pi/8 and 9 pi/64.
    """
    a, b = prior.a, prior.b
    return math.exp(
        log_gamma(a + 0.5)
        + log_gamma(b + 0.5)
        - math.log(a + b)
        - log_gamma(a)
        - log_gamma(b)
    )


def _require_point(q: SampleSizeQuery) -> float:
    if q.p0 is None:
        raise DomainError("this operation needs a point guess p0")
    return q.p0


def _require_prior(q: SampleSizeQuery) -> BetaParams:
    if q.prior is None:
        raise DomainError("this operation needs a Beta prior")
    return q.prior


def _two_sided_n(z: float, m2: float, m4: float, d: float) -> float:
    # Solves 2 z sqrt(m2) n^(-1/2) + n^(-1) = d; m2 plays p0*q0, m4 its square.
    return (2.0 * z * z * m2 + 2.0 * z * math.sqrt(z * z * m4 + d * m2) + d) / (d * d)


def cp_n_two_sided(query: SampleSizeQuery) -> SampleSizeResult:
    """Sample size for a target expected two-sided Clopper-Pearson length."""
    if query.side is not Side.TWO_SIDED:
        raise DomainError("cp_n_two_sided requires a two-sided query")
    p0 = _require_point(query)
    q0 = 1.0 - p0
    pq = p0 * q0
    n = _two_sided_n(query.level.z_half, pq, pq * pq, query.d)
    return SampleSizeResult(math.ceil(n), n, FormulaMode.DERIVED_ALGEBRA)


def cp_n_two_sided_prior(query: SampleSizeQuery) -> SampleSizeResult:
    """Two-sided sample size with p integrated out against a Beta prior."""
    if query.side is not Side.TWO_SIDED:
        raise DomainError("cp_n_two_sided_prior requires a two-sided query")
    r = prior_moment(_require_prior(query))
    r2 = r * r
    n = _two_sided_n(query.level.z_half, r2, r2 * r2, query.d)
    return SampleSizeResult(math.ceil(n), n, FormulaMode.DERIVED_ALGEBRA)


def cp_n_one_sided(
    query: SampleSizeQuery, formula: FormulaMode = FormulaMode.DERIVED_ALGEBRA
) -> SampleSizeResult:
    """Sample size for a target expected distance of the upper CP bound to p.

    DERIVED_ALGEBRA solves the second-order approximation
    d = z sqrt(p0 q0) n^(-1/2) + C/(3n), C = 2(1/2 - p0) z^2 + 1 + q0,
    as a quadratic in sqrt(n).  PAPER_VERBATIM evaluates the printed display
    exactly as typeset (which is inconsistent with that derivation).
    """
    if query.side is not Side.UPPER:
        raise DomainError("cp_n_one_sided requires an upper one-sided query")
    p0 = _require_point(query)
    q0 = 1.0 - p0
    pq = p0 * q0
    d = query.d
    z = query.level.z_full
    z2 = z * z
    c = 2.0 * (0.5 - p0) * z2 + 1.0 + q0
    if formula is FormulaMode.DERIVED_ALGEBRA:
        root_n = (z * math.sqrt(pq) + math.sqrt(z2 * pq + (4.0 * d / 3.0) * c)) / (2.0 * d)
        n = root_n * root_n
    else:
        n = (
            9.0 * z2 * pq
            + 3.0
            * z
            * math.sqrt(3.0 * pq)
            * math.sqrt(3.0 * z2 * pq + 4.0 * (d * z2 - 2.0 * d * z2 * p0 + d * (1.0 + q0)))
            + 6.0 * (2.0 * z2 * (0.5 - p0) + (1.0 + q0))
        ) / (2.0 * d * d)
    return SampleSizeResult(math.ceil(n), n, formula)


_ONE_SIDED_PRIOR_LIMIT = 2.0


def _one_sided_prior_coeffs(prior: BetaParams, z: float) -> tuple[float, float]:
    a, b = prior.a, prior.b
    if not (0.0 < a < _ONE_SIDED_PRIOR_LIMIT and 0.0 < b < _ONE_SIDED_PRIOR_LIMIT):
        raise DomainError(
            "prior-averaged one-sided sample size needs 0 < a < 2 and 0 < b < 2 "
            f"(gamma-function poles), got a={a}, b={b}"
        )
    coeff_half = z * math.exp(
        log_gamma(2.5 - a) + log_gamma(2.5 - b) - log_gamma(5.0 - a - b)
    )
    coeff_one = (2.0 + z * z) / 3.0 * math.exp(
        log_gamma(2.0 - a) + log_gamma(2.0 - b) - log_gamma(4.0 - a - b)
    ) - (2.0 * z * z + 1.0) / 3.0 * math.exp(
        log_gamma(3.0 - a) + log_gamma(2.0 - b) - log_gamma(5.0 - a - b)
    )
    return coeff_half, coeff_one


def cp_n_one_sided_prior(query: SampleSizeQuery) -> SampleSizeResult:
    """One-sided sample size with p integrated out against a Beta prior.

    Solves A n^(-1/2) + B n^(-1) = d, where A and B are the prior-averaged
    expansion coefficients; for the Jeffreys prior A = z/6 and B = pi/16.
    """
    if query.side is not Side.UPPER:
        raise DomainError("cp_n_one_sided_prior requires an upper one-sided query")
    coeff_half, coeff_one = _one_sided_prior_coeffs(
        _require_prior(query), query.level.z_full
    )
    d = query.d
    if coeff_one == 0.0:
        u = d / coeff_half
    else:
        disc = coeff_half * coeff_half + 4.0 * coeff_one * d
        if disc < 0.0:
            raise DomainError("target d is unattainable for this prior")
        u = (-coeff_half + math.sqrt(disc)) / (2.0 * coeff_one)
    if not (u > 0.0):
        raise DomainError("target d is unattainable for this prior")
    n = 1.0 / (u * u)
    return SampleSizeResult(math.ceil(n), n, FormulaMode.DERIVED_ALGEBRA)


def jeffreys_one_sided_n_verbatim(d: float, level: ConfidenceLevel) -> float:
    """The printed Jeffreys-prior one-sided closed form, exactly as typeset.

    Kept for comparison; it disagrees with the direct inversion of the
    prior-averaged expansion by a large factor.
    """
    if not (0.0 < d < 1.0):
        raise DomainError(f"target d must be in (0, 1), got {d}")
    z = level.z_full
    return 6.0 * z * (z + math.sqrt(z * z + 9.0 * d * math.pi)) / (d * d) + math.pi / (
        16.0 * d
    )


def approx_method_n(
    family: ApproxFamily, d: float, p0: float, level: ConfidenceLevel
) -> SampleSizeResult:
    """Printed sample-size formulas for the approximate comparison intervals."""
    if not (0.0 < d < 1.0):
        raise DomainError(f"target d must be in (0, 1), got {d}")
    if not (0.0 < p0 < 1.0):
        raise DomainError(f"p0 must be in (0, 1), got {p0}")
    z = level.z_half
    z2 = z * z
    q0 = 1.0 - p0
    pq = p0 * q0
    if family is ApproxFamily.JEFFREYS:
        n = 4.0 * z2 * pq / (d * d)
    elif family is ApproxFamily.WILSON:
        n = (
            z2
            * (pq + d * d / 2.0 + math.sqrt(pq * pq + d * d * (p0 - 0.5) ** 2))
            * 2.0
            / (d * d)
        )
    else:
        n = 4.0 * z2 * pq / (d * d) - z2
    return SampleSizeResult(math.ceil(n), n, FormulaMode.DERIVED_ALGEBRA)


def _estimate_for(method: MethodSpec, d: float, p0: float, level: ConfidenceLevel) -> float:
    q0 = 1.0 - p0
    pq = p0 * q0
    if method.side is Side.TWO_SIDED:
        if method.family is Family.CLOPPER_PEARSON:
            return cp_n_two_sided(SampleSizeQuery(d, level, Side.TWO_SIDED, p0)).n_unrounded
        if method.family is Family.WILSON:
            return approx_method_n(ApproxFamily.WILSON, d, p0, level).n_unrounded
        if method.family is Family.AGRESTI_COULL:
            return approx_method_n(ApproxFamily.AGRESTI_COULL, d, p0, level).n_unrounded
        return approx_method_n(ApproxFamily.JEFFREYS, d, p0, level).n_unrounded
    if method.family is Family.CLOPPER_PEARSON:
        return cp_n_one_sided(SampleSizeQuery(d, level, Side.UPPER, p0)).n_unrounded
    z = level.z_full
    return z * z * pq / (d * d)


_EXACT_WINDOW = 25


def exact_n(
    method: MethodSpec,
    d: float,
    p0: float,
    level: ConfidenceLevel,
    side: Side | None = None,
    n_max: int = 10**6,
) -> SampleSizeResult:
    """Smallest n in [2, n_max] whose exact expected width/distance is <= d.

    Starts from the closed-form estimate, walks to a first passing n, then
    re-checks the 25 sample sizes below it because the expected width is not
    perfectly monotone in n; the smallest passing n in that window is
    returned with its achieved expected width.
    """
    if side is not None and side is not method.side:
        method = MethodSpec(method.family, side, method.prior)
    if method.side is Side.LOWER:
        raise DomainError("exact_n takes side two-sided or upper")
    if d <= 0.0:
        raise DomainError(f"target d must be positive, got {d}")
    if not (0.0 < p0 < 1.0):
        raise DomainError(f"p0 must be in (0, 1), got {p0}")

    cache: dict[int, float] = {}

    def width(n: int) -> float:
        if n not in cache:
            if len(cache) > 200_000:
                raise SearchBudgetError("exact_n evaluation budget exhausted")
            cache[n] = exact_eval.expected_width_exact(method, n, p0, level)
        return cache[n]

    def passing(n: int) -> bool:
        return width(n) <= d

    # Any realized width is at most 1, so d >= 1 is met by the smallest
    # allowed sample size outright.
    n0 = 2 if d >= 1.0 else min(
        max(2, math.ceil(_estimate_for(method, d, p0, level))), n_max
    )
    n = n0
    if passing(n):
        while n > 2 and passing(n - 1):
            n -= 1
    else:
        while not passing(n):
            if n >= n_max:
                raise SearchBudgetError(
                    f"no n <= {n_max} achieves expected width {d} for {method}"
                )
            n += 1
    first_pass = n
    # Expected width is not perfectly monotone in n; re-check the window
    # below the first passing n in one batched pass and keep the smallest.
    best = first_pass
    window = [m for m in range(max(2, first_pass - _EXACT_WINDOW), first_pass) if m not in cache]
    cache.update(zip(window, exact_eval.expected_widths_batch(method, window, p0, level)))
    for cand in range(max(2, first_pass - _EXACT_WINDOW), first_pass):
        if passing(cand):
            best = cand
            break
    return SampleSizeResult(
        best, float(best), FormulaMode.DERIVED_ALGEBRA, width(best)
    )


def n_plus_two_sided(
    vs: ApproxFamily,
    d: float,
    p0: float,
    level: ConfidenceLevel,
    formula: FormulaMode = FormulaMode.DERIVED_ALGEBRA,
) -> float:
    """Extra observations the exact interval needs versus an approximate one.

    DERIVED_ALGEBRA takes the unrounded difference of the two sample-size
    formulas.  PAPER_VERBATIM evaluates the printed approximations; for the
    Jeffreys and Agresti-Coull comparisons the two modes coincide
    identically, for Wilson they differ in the sign of one d^2 z^2 term.
    """
    if not (0.0 < d < 1.0) or not (0.0 < p0 < 1.0):
        raise DomainError(f"need 0 < d < 1 and 0 < p0 < 1, got d={d}, p0={p0}")
    z = level.z_half
    z2 = z * z
    q0 = 1.0 - p0
    pq = p0 * q0
    if formula is FormulaMode.DERIVED_ALGEBRA:
        n_cp = cp_n_two_sided(SampleSizeQuery(d, level, Side.TWO_SIDED, p0)).n_unrounded
        return n_cp - approx_method_n(vs, d, p0, level).n_unrounded
    root = math.sqrt(z2 * pq * pq + d * pq)
    if vs is ApproxFamily.JEFFREYS:
        return (d - 2.0 * z * (z * pq - root)) / (d * d)
    if vs is ApproxFamily.WILSON:
        other = math.sqrt(z2 * pq * pq + d * d * z2 * (p0 - 0.5) ** 2)
        return (d * (1.0 + d * z2) + 2.0 * z * (root - other)) / (d * d)
    return (d + z2 * (d * d - 2.0 * pq) + 2.0 * z * root) / (d * d)


def n_plus_one_sided(
    d: float,
    p0: float,
    level: ConfidenceLevel,
    formula: FormulaMode = FormulaMode.DERIVED_ALGEBRA,
) -> float:
    """Extra observations the exact upper bound needs versus the naive
    first-order sample size z^2 p0 q0 / d^2 for an approximate bound."""
    if not (0.0 < d < 1.0) or not (0.0 < p0 < 1.0):
        raise DomainError(f"need 0 < d < 1 and 0 < p0 < 1, got d={d}, p0={p0}")
    z = level.z_full
    z2 = z * z
    q0 = 1.0 - p0
    pq = p0 * q0
    if formula is FormulaMode.DERIVED_ALGEBRA:
        n_cp = cp_n_one_sided(SampleSizeQuery(d, level, Side.UPPER, p0)).n_unrounded
        return n_cp - z2 * pq / (d * d)
    omega = 9.0 * z2 * pq + 12.0 * d * z2 - 24.0 * d * z2 * p0
    return (
        math.sqrt(omega + 12.0 * d * (1.0 + q0))
        - math.sqrt(omega + 12.0 * d * (0.5 - p0))
        + d / 2.0
    ) / (d * d)


def n_plus_adjusted(d: float, p0: float, level: ConfidenceLevel, gamma: float) -> float:
    """Extra observations of the exact interval versus a gamma-adjusted
    Jeffreys interval (nominal level 1 - gamma), as printed; negative values
    mean the exact interval needs fewer observations."""
    if not (0.0 < d < 1.0) or not (0.0 < p0 < 1.0):
        raise DomainError(f"need 0 < d < 1 and 0 < p0 < 1, got d={d}, p0={p0}")
    if not (0.0 < gamma < 1.0):
        raise DomainError(f"gamma must be in (0, 1), got {gamma}")
    z_a = level.z_half
    z_g = normal_quantile(1.0 - gamma / 2.0)
    q0 = 1.0 - p0
    pq = p0 * q0
    return (
        d
        + 2.0 * pq * (z_a * z_a - 2.0 * z_g * z_g)
        + 2.0 * z_a * math.sqrt(z_a * z_a * pq * pq + d * pq)
    ) / (d * d)
