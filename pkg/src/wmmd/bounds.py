"""Concentration and variance bounds, with seeded Monte-Carlo verification.

Analytic side
-------------
``iw_tail_bound`` bounds the one-sided deviation of the importance-
weighted estimator when weights are uniformly bounded:

    P(estimate - MMD^2 > t) <= exp(-2 t^2 floor(m/2) / (K^2 (W+1)^4))

``mom_tail_bound`` bounds the two-sided deviation of the median-of-means
variant using k = m t^2 / (8 K^2 sigma^2) groups:

    P(|estimate - MMD^2| > t) <= exp(-m t^2 / (64 K^2 sigma^2))

``pair_variance_bound`` bounds the variance of the weighted pair term

    h(z_i, z_j) = w_i w_j k(x_i,x_j) + k(y_i,y_j)
                  - w_i k(x_i,y_j) - w_j k(x_j,y_i)

by 5 (K^2 (W2 + 1)^2 + (MMD^2)^2) where W2 = E[1/M(X)^2]; the estimator
variance itself is bounded by 2 Var(h) / m.

Empirical side
--------------
``empirical_tail`` / ``iw_tail_rows`` / ``mom_tail_rows`` measure
exceedance frequencies over seeded replicates and report them next to
the analytic bound; ``empirical_variance`` does the same for the
variance bound.  Replicate r always uses the RNG seeded by
``derive_seed(seed, r)``, so results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .estimators import EstimatorConfig, estimate
from .kernels import pair_evaluate
from .samples import SampleSet
from .scenarios import TailScenario
from .seeding import derive_seed

MIN_REPLICATES = 100


@dataclass(frozen=True)
class BoundParams:
    """Inputs shared by the analytic bounds; validates their ranges."""

    t: float
    m: int
    kernel_bound: float
    weight_bound: float | None = None
    weight_second_moment: float | None = None
    mmd2: float | None = None
    sigma2: float | None = None

    def __post_init__(self):
        if self.t <= 0.0:
            raise InputError("deviation t must be positive")
        if self.m < 4:
            raise InputError("sample count m must be at least 4")
        if self.kernel_bound <= 0.0:
            raise InputError("kernel bound must be positive")
        if self.weight_bound is not None and self.weight_bound < 1.0:
            raise InputError("weight bound W must be >= 1")
        if self.weight_second_moment is not None and self.weight_second_moment < 1.0:
            raise InputError("weight second moment W2 must be >= 1")
        if self.sigma2 is not None and self.sigma2 <= 0.0:
            raise InputError("sigma2 must be positive")


def iw_tail_bound(t: float, m: int, kernel_bound: float, weight_bound: float) -> float:
    """One-sided tail bound for the importance-weighted estimator."""
    BoundParams(t=t, m=m, kernel_bound=kernel_bound, weight_bound=weight_bound)
    m2 = m // 2
    arg = -2.0 * t * t * m2 / (kernel_bound**2 * (weight_bound + 1.0) ** 4)
    return min(1.0, math.exp(arg))


def nearest_odd(value: float) -> int:
    """Nearest odd integer >= 1; ties round up."""
    lo = 2 * math.floor((value - 1.0) / 2.0) + 1
    hi = lo + 2
    k = lo if (value - lo) < (hi - value) else hi
    return max(k, 1)


def mom_tail_bound(
    t: float, m: int, kernel_bound: float, sigma2: float
) -> tuple[float, int]:
    """Two-sided tail bound and prescribed group count for median-of-means."""
    BoundParams(t=t, m=m, kernel_bound=kernel_bound, sigma2=sigma2)
    arg = -m * t * t / (64.0 * kernel_bound**2 * sigma2)
    k = nearest_odd(m * t * t / (8.0 * kernel_bound**2 * sigma2))
    return min(1.0, math.exp(arg)), k


def pair_variance_bound(
    kernel_bound: float, weight_second_moment: float, mmd2: float
) -> float:
    """Upper bound on Var of the weighted pair term h."""
    if kernel_bound <= 0.0:
        raise InputError("kernel bound must be positive")
    if weight_second_moment < 1.0:
        raise InputError("weight second moment W2 must be >= 1")
    return 5.0 * (
        kernel_bound**2 * (weight_second_moment + 1.0) ** 2 + mmd2 * mmd2
    )


# -- Monte-Carlo machinery ---------------------------------------------------


def weighted_pair_terms(spec, X: SampleSet, Y: SampleSet) -> np.ndarray:
    """Values of the weighted pair term h over disjoint consecutive pairs.

    Rows 2i and 2i+1 of (X, Y) form the pair (z_i, z_j); an odd trailing
    row is dropped.  The result is a vector of i.i.d. h values when the
    rows are i.i.d. draws.
    """
    w = X.require_weights("the pair term")
    n = 2 * (X.n // 2)
    if n < 2 or Y.n < n:
        raise InputError("need at least one (x, y) pair per sample")
    xi, xj = X.points[0:n:2], X.points[1:n:2]
    wi, wj = w[0:n:2], w[1:n:2]
    yi, yj = Y.points[0:n:2], Y.points[1:n:2]
    return (
        wi * wj * pair_evaluate(spec, xi, xj)
        + pair_evaluate(spec, yi, yj)
        - wi * pair_evaluate(spec, xi, yj)
        - wj * pair_evaluate(spec, xj, yi)
    )


def variance_with_stderr(values: np.ndarray) -> tuple[float, float]:
    """Sample variance and the large-sample stderr of that variance.

    Var(s^2) is approximated by (m4 - m2^2) / R with central moments m4
    and m2, which is consistent without normality assumptions.
    """
    v = np.asarray(values, dtype=np.float64)
    r = v.shape[0]
    if r < 4:
        raise InputError("need at least 4 values to report a variance stderr")
    centered = v - v.mean()
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    var = float(np.var(v, ddof=1))
    return var, math.sqrt(max(m4 - m2 * m2, 0.0) / r)


def deviation_sample(
    scenario: TailScenario,
    config: EstimatorConfig,
    m: int,
    replicates: int,
    seed: int,
) -> np.ndarray:
    """estimate - true_mmd2 over seeded replicates of size-m draws."""
    if replicates < MIN_REPLICATES:
        raise InputError(
            f"at least {MIN_REPLICATES} replicates required for a tail estimate"
        )
    devs = np.empty(replicates)
    for r in range(replicates):
        rep_seed = derive_seed(seed, r)
        rng = np.random.default_rng(rep_seed)
        observed, reference = scenario.draw(rng, m)
        rep_config = EstimatorConfig(
            kind=config.kind, groups=config.groups, seed=derive_seed(rep_seed, 1)
        )
        value = estimate(scenario.kernel, rep_config, observed, reference).value
        devs[r] = value - scenario.true_mmd2
    return devs


@dataclass(frozen=True)
class TailEstimate:
    probability: float
    stderr: float
    replicates: int


def _tail_from_deviations(devs: np.ndarray, t: float, two_sided: bool) -> TailEstimate:
    hits = np.abs(devs) > t if two_sided else devs > t
    p = float(np.mean(hits))
    se = math.sqrt(p * (1.0 - p) / devs.shape[0])
    return TailEstimate(probability=p, stderr=se, replicates=devs.shape[0])


def empirical_tail(
    scenario: TailScenario,
    config: EstimatorConfig,
    t: float,
    m: int,
    replicates: int,
    seed: int,
    two_sided: bool = False,
) -> TailEstimate:
    """Exceedance frequency of the estimator deviation, with binomial stderr."""
    if t <= 0.0:
        raise InputError("deviation t must be positive")
    devs = deviation_sample(scenario, config, m, replicates, seed)
    return _tail_from_deviations(devs, t, two_sided)


@dataclass(frozen=True)
class TailRow:
    """One row of a bound-verification table."""

    scenario: str
    estimator: str
    t: float
    empirical_p: float
    stderr: float
    bound: float
    groups: int | None = None


def iw_tail_rows(
    scenario: TailScenario,
    ts,
    m: int,
    replicates: int,
    seed: int,
) -> list[TailRow]:
    """One-sided exceedance vs the bounded-weight tail bound on a t grid.

    All grid points share one replicate set; the bound needs the
    scenario's uniform weight bound.
    """
    if scenario.weight_bound is None:
        raise InputError(f"scenario {scenario.name!r} has no uniform weight bound")
    devs = deviation_sample(scenario, EstimatorConfig(kind="iw"), m, replicates, seed)
    rows = []
    for t in ts:
        est = _tail_from_deviations(devs, float(t), two_sided=False)
        bound = iw_tail_bound(float(t), m, scenario.kernel.bound, scenario.weight_bound)
        rows.append(
            TailRow(
                scenario=scenario.name,
                estimator="iw",
                t=float(t),
                empirical_p=est.probability,
                stderr=est.stderr,
                bound=bound,
            )
        )
    return rows


def estimate_pair_variance(
    scenario: TailScenario, draws: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo Var(h) from ``draws`` disjoint pairs, with its stderr."""
    rng = np.random.default_rng(derive_seed(seed, 0))
    observed, reference = scenario.draw(rng, 2 * draws)
    return variance_with_stderr(
        weighted_pair_terms(scenario.kernel, observed, reference)
    )


def mom_tail_rows(
    scenario: TailScenario,
    ts,
    m: int,
    replicates: int,
    seed: int,
    sigma2: float | None = None,
) -> list[TailRow]:
    """Two-sided exceedance of median-of-means vs its tail bound.

    The group count is recomputed from the bound's formula at every t,
    so each grid point gets its own replicate set.  ``sigma2`` defaults
    to the analytic pair-term variance bound; pass a Monte-Carlo value
    (see ``estimate_pair_variance``) to exercise larger group counts.
    """
    if sigma2 is None:
        if scenario.weight_second_moment is None:
            raise InputError(
                f"scenario {scenario.name!r} has no weight second moment; "
                "pass sigma2 explicitly"
            )
        sigma2 = pair_variance_bound(
            scenario.kernel.bound, scenario.weight_second_moment, scenario.true_mmd2
        )
    # largest odd group count that still leaves >= 2 points per group
    kmax = m // 2 if (m // 2) % 2 == 1 else m // 2 - 1
    rows = []
    for i, t in enumerate(ts):
        bound, k = mom_tail_bound(float(t), m, scenario.kernel.bound, sigma2)
        k = min(k, max(kmax, 1))
        config = EstimatorConfig(kind="miw", groups=k)
        est = empirical_tail(
            scenario, config, float(t), m, replicates, derive_seed(seed, i), two_sided=True
        )
        rows.append(
            TailRow(
                scenario=scenario.name,
                estimator="miw",
                t=float(t),
                empirical_p=est.probability,
                stderr=est.stderr,
                bound=bound,
                groups=k,
            )
        )
    return rows


@dataclass(frozen=True)
class VarianceReport:
    """Empirical estimator variance next to the 2 Var(h)/m bound."""

    m: int
    replicates: int
    variance: float
    variance_stderr: float
    pair_variance: float
    pair_variance_stderr: float

    @property
    def bound(self) -> float:
        return 2.0 * self.pair_variance / self.m


def empirical_variance(
    scenario: TailScenario,
    m: int,
    replicates: int,
    seed: int,
    pair_draws: int = 100_000,
) -> VarianceReport:
    """Sample variance of the importance-weighted estimator vs 2 Var(h)/m."""
    if replicates < MIN_REPLICATES:
        raise InputError(
            f"at least {MIN_REPLICATES} replicates required for a variance estimate"
        )
    values = np.empty(replicates)
    for r in range(replicates):
        rng = np.random.default_rng(derive_seed(seed, r))
        observed, reference = scenario.draw(rng, m)
        values[r] = estimate(
            scenario.kernel, EstimatorConfig(kind="iw"), observed, reference
        ).value
    var, var_se = variance_with_stderr(values)
    pair_var, pair_se = estimate_pair_variance(
        scenario, pair_draws, derive_seed(seed, replicates + 1)
    )
    return VarianceReport(
        m=m,
        replicates=replicates,
        variance=var,
        variance_stderr=var_se,
        pair_variance=pair_var,
        pair_variance_stderr=pair_se,
    )
