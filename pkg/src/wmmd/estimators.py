"""Squared-MMD estimators and generic weighted statistics.

Given samples ``X`` (possibly drawn from a reweighted version of the
target distribution, with per-point importance weights ``w_i``) and
``Y``, the estimators of the squared maximum mean discrepancy are:

unweighted (``u``), an unbiased U-statistic that may be negative:

    1/(n(n-1)) sum_{i!=j} k(x_i,x_j) + 1/(m(m-1)) sum_{i!=j} k(y_i,y_j)
        - 2/(nm) sum_{i,j} k(x_i,y_j)

importance-weighted (``iw``), unbiased for the target when w = 1/M with
M the density ratio observed/target:

    1/(n(n-1)) sum_{i!=j} w_i w_j k(x_i,x_j) + (same middle term)
        - 2/(nm) sum_{i,j} w_i k(x_i,y_j)

median-of-means (``miw``): shuffle, split into k equal groups, apply the
importance-weighted estimator per group, report the median group value.
Robust to heavy-tailed weights.

self-normalized (``sn``), for weights known only up to a constant scale:

    sum_{i!=j} w_i w_j k(x_i,x_j) / sum_{i!=j} w_i w_j
        + 1/(m(m-1)) sum_{i!=j} k(y_i,y_j)
        - 2 sum_{i,j} w_i k(x_i,y_j) / (m sum_i w_i)

upsampling baseline (``upsample``): replicate each x_i ceil(1/M(x_i))
times and apply the unweighted estimator to the enlarged set.  Biased,
because replicated points contribute k(x_i, x_i) terms.

All sums run in fixed row-major order with compensated accumulation
(see ``accumulate``), which is what makes the exact reduction identities
(unit weights -> unweighted estimator, bit for bit) hold.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .accumulate import kahan_sum
from .errors import InputError, ResourceError
from .kernels import KernelSpec, gram
from .samples import SampleSet, as_points

ESTIMATOR_KINDS = ("u", "iw", "miw", "sn", "upsample")

# Hard cap on the enlarged point count materialized by the upsampling
# baseline; exceeding it is an error rather than silent truncation.
UPSAMPLE_CAP = 1_000_000

# Reciprocals within this relative distance of an integer are treated as
# that integer when computing ceil(1/M), so M = 1/3 yields 3 copies even
# though 1/float(1/3) = 3.0000000000000004.
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class EstimatorConfig:
    """Which estimator to run, with its grouping and seeding parameters."""

    kind: str = "u"
    groups: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise InputError(f"unknown estimator kind {self.kind!r}")
        if self.groups < 1:
            raise InputError("group count must be >= 1")


@dataclass(frozen=True)
class EstimateReport:
    """Estimate value plus grouping metadata (populated for ``miw``)."""

    kind: str
    value: float
    group_values: tuple[float, ...] | None = None
    groups: int | None = None
    seed: int | None = None
    n_used: int = 0
    m_used: int = 0
    dropped: int = 0


def _check_pair(X: SampleSet, Y: SampleSet):
    if not isinstance(X, SampleSet) or not isinstance(Y, SampleSet):
        raise InputError("estimators take SampleSet inputs")
    if X.dim != Y.dim:
        raise InputError(f"dimension mismatch: {X.dim} vs {Y.dim}")
    if X.n < 2 or Y.n < 2:
        raise InputError(
            f"estimators need at least 2 points per sample (got n={X.n}, m={Y.n})"
        )


def _sum_offdiag_weighted(spec: KernelSpec, pts: np.ndarray, w: np.ndarray) -> float:
    """sum_{i != j} w_i w_j k(p_i, p_j) in fixed row-major order."""
    K = gram(spec, pts, pts)
    terms = (w[:, None] * w[None, :]) * K
    np.fill_diagonal(terms, 0.0)
    return kahan_sum(terms)


def _sum_cross_weighted(
    spec: KernelSpec, x: np.ndarray, w: np.ndarray, y: np.ndarray
) -> float:
    """sum_{i, j} w_i k(x_i, y_j) in fixed row-major order."""
    K = gram(spec, x, y)
    return kahan_sum(w[:, None] * K)


def _sum_offdiag_pairs(w: np.ndarray) -> float:
    """sum_{i != j} w_i w_j with the same reduction as the kernel terms."""
    terms = w[:, None] * w[None, :]
    np.fill_diagonal(terms, 0.0)
    return kahan_sum(terms)


def _mmd2_weighted_core(
    spec: KernelSpec, x: np.ndarray, w: np.ndarray, y: np.ndarray
) -> float:
    n = x.shape[0]
    m = y.shape[0]
    ones_m = np.ones(m)
    first = _sum_offdiag_weighted(spec, x, w) / (n * (n - 1))
    middle = _sum_offdiag_weighted(spec, y, ones_m) / (m * (m - 1))
    cross = _sum_cross_weighted(spec, x, w, y) * 2.0 / (n * m)
    return first + middle - cross


def _mmd2_sn_core(
    spec: KernelSpec, x: np.ndarray, w: np.ndarray, y: np.ndarray
) -> float:
    n = x.shape[0]
    m = y.shape[0]
    ones_m = np.ones(m)
    first = _sum_offdiag_weighted(spec, x, w) / _sum_offdiag_pairs(w)
    middle = _sum_offdiag_weighted(spec, y, ones_m) / (m * (m - 1))
    cross = 2.0 * _sum_cross_weighted(spec, x, w, y) / (m * kahan_sum(w))
    return first + middle - cross


def mmd2_u(spec: KernelSpec, X: SampleSet, Y: SampleSet) -> float:
    """Unbiased squared-MMD U-statistic; ignores any weights on X."""
    _check_pair(X, Y)
    return _mmd2_weighted_core(spec, X.points, np.ones(X.n), Y.points)


def mmd2_iw(spec: KernelSpec, X: SampleSet, Y: SampleSet) -> float:
    """Importance-weighted squared-MMD estimator; X must carry weights."""
    _check_pair(X, Y)
    w = X.require_weights("the importance-weighted estimator")
    return _mmd2_weighted_core(spec, X.points, w, Y.points)


def split_groups(m: int, groups: int, seed: int) -> tuple[list[np.ndarray], int, int]:
    """Seeded shuffle of range(m) split into an odd number of equal groups.

    ``groups`` is rounded up to the next odd integer so the median is a
    single order statistic.  Each group holds floor(m / k) indices; the
    m mod k leftover indices are dropped.  Returns (groups, k, dropped).
    """
    k = groups if groups % 2 == 1 else groups + 1
    size = m // k
    if size < 2:
        raise InputError(
            f"{k} groups of {m} points leave fewer than 2 points per group"
        )
    perm = np.random.default_rng(seed).permutation(m)
    idx = [perm[g * size : (g + 1) * size] for g in range(k)]
    return idx, k, m - k * size


def mmd2_miw(
    spec: KernelSpec, X: SampleSet, Y: SampleSet, groups: int, seed: int
) -> EstimateReport:
    """Median of per-group importance-weighted estimates.

    Requires n = m; the i-th points of X and Y travel together into the
    same group, so groups are i.i.d. blocks.  The reported value is the
    middle order statistic of the group values.
    """
    _check_pair(X, Y)
    w = X.require_weights("the median-of-means estimator")
    if X.n != Y.n:
        raise InputError(
            f"median-of-means estimation requires n = m (got {X.n} and {Y.n})"
        )
    idx, k, dropped = split_groups(X.n, groups, seed)
    values = np.array(
        [
            _mmd2_weighted_core(spec, X.points[ix], w[ix], Y.points[ix])
            for ix in idx
        ]
    )
    value = float(np.sort(values)[(k - 1) // 2])
    used = X.n - dropped
    return EstimateReport(
        kind="miw",
        value=value,
        group_values=tuple(float(v) for v in values),
        groups=k,
        seed=seed,
        n_used=used,
        m_used=used,
        dropped=dropped,
    )


def mmd2_sn(spec: KernelSpec, X: SampleSet, Y: SampleSet) -> float:
    """Self-normalized estimator; X weights may carry an arbitrary scale."""
    _check_pair(X, Y)
    w = X.require_weights("the self-normalized estimator")
    return _mmd2_sn_core(spec, X.points, w, Y.points)


def upsample_counts(modifiers: np.ndarray) -> np.ndarray:
    """Copy counts ceil(1/M) with a guard for near-integer reciprocals."""
    r = 1.0 / modifiers
    counts = np.ceil(r - _CEIL_SLACK * np.maximum(r, 1.0)).astype(np.int64)
    return np.maximum(counts, 1)


def mmd2_upsample(
    spec: KernelSpec, X: SampleSet, Y: SampleSet, max_points: int = UPSAMPLE_CAP
) -> float:
    """Upsampling baseline: materialize ceil(1/M) copies, then run ``u``.

    The minimum-size requirement applies to the enlarged set, so a
    single heavily thinned point is acceptable input.
    """
    if not isinstance(X, SampleSet) or not isinstance(Y, SampleSet):
        raise InputError("estimators take SampleSet inputs")
    if X.dim != Y.dim:
        raise InputError(f"dimension mismatch: {X.dim} vs {Y.dim}")
    if Y.n < 2:
        raise InputError(f"estimators need at least 2 points per sample (got m={Y.n})")
    m_vals = X.require_modifiers("the upsampling baseline")
    if np.any(m_vals > 1.0 + 1e-12):
        raise InputError("upsampling requires modifier values in (0, 1]")
    counts = upsample_counts(m_vals)
    total = int(counts.sum())
    if total > max_points:
        raise ResourceError(
            f"upsampling would materialize {total} points (cap {max_points})"
        )
    if total < 2:
        raise InputError("enlarged sample holds fewer than 2 points")
    enlarged = np.repeat(X.points, counts, axis=0)
    return _mmd2_weighted_core(spec, enlarged, np.ones(total), Y.points)


def estimate(
    spec: KernelSpec, config: EstimatorConfig, X: SampleSet, Y: SampleSet
) -> EstimateReport:
    """Dispatch on ``config.kind`` and wrap the value in a report."""
    if config.kind == "miw":
        return mmd2_miw(spec, X, Y, config.groups, config.seed)
    if config.kind == "u":
        value = mmd2_u(spec, X, Y)
    elif config.kind == "iw":
        value = mmd2_iw(spec, X, Y)
    elif config.kind == "sn":
        value = mmd2_sn(spec, X, Y)
    else:
        value = mmd2_upsample(spec, X, Y)
    return EstimateReport(
        kind=config.kind, value=value, seed=config.seed, n_used=X.n, m_used=Y.n
    )


# ---------------------------------------------------------------------------
# Generic weighted statistics.
#
# Any loss expressible through U-statistics, V-statistics and sample
# averages admits the same reweighting treatment as the squared MMD.
# The six combinators below are the building blocks: ``weighted_*``
# divide each term by the modifier product (equivalently multiply by the
# weight product), ``sn_*`` normalize by the summed weight products so a
# common weight scale cancels.
# ---------------------------------------------------------------------------


def _stat_inputs(points, weights, r: int):
    pts = as_points(points)
    n = pts.shape[0]
    if r < 1:
        raise InputError("tuple order r must be >= 1")
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.shape[0] != n:
        raise InputError(f"weights length {w.shape[0]} does not match n={n}")
    return pts, w, n


def weighted_u_stat(g, points, weights, r: int) -> float:
    """Weighted U-statistic: mean of w-products times g over distinct r-tuples.

    Sums w_{u1}...w_{ur} * g(x_{u1}, ..., x_{ur}) over ordered r-tuples of
    distinct indices, divided by n!/(n-r)!.
    """
    pts, w, n = _stat_inputs(points, weights, r)
    if r > n:
        raise InputError(f"U-statistic of order {r} needs at least {r} points")
    terms = [
        math.prod(w[list(u)].tolist()) * float(g(*(pts[i] for i in u)))
        for u in itertools.permutations(range(n), r)
    ]
    return math.fsum(terms) / (math.perm(n, r))


def weighted_v_stat(g, points, weights, r: int) -> float:
    """Weighted V-statistic: as the U-statistic but over all n^r tuples."""
    pts, w, n = _stat_inputs(points, weights, r)
    terms = [
        math.prod(w[list(v)].tolist()) * float(g(*(pts[i] for i in v)))
        for v in itertools.product(range(n), repeat=r)
    ]
    return math.fsum(terms) / (n**r)


def weighted_average(f, x_points, y_points, weights) -> float:
    """Weighted two-sample average: 1/(nm) sum_{i,j} w_i f(x_i, y_j)."""
    xp, w, n = _stat_inputs(x_points, weights, 1)
    yp = as_points(y_points)
    m = yp.shape[0]
    terms = [
        w[i] * float(f(xp[i], yp[j])) for i in range(n) for j in range(m)
    ]
    return math.fsum(terms) / (n * m)


def sn_u_stat(g, points, weights, r: int) -> float:
    """Self-normalized U-statistic: weight-product sums in the denominator."""
    pts, w, n = _stat_inputs(points, weights, r)
    if r > n:
        raise InputError(f"U-statistic of order {r} needs at least {r} points")
    num = []
    den = []
    for u in itertools.permutations(range(n), r):
        wp = math.prod(w[list(u)].tolist())
        num.append(wp * float(g(*(pts[i] for i in u))))
        den.append(wp)
    return math.fsum(num) / math.fsum(den)


def sn_v_stat(g, points, weights, r: int) -> float:
    """Self-normalized V-statistic over all n^r tuples."""
    pts, w, n = _stat_inputs(points, weights, r)
    num = []
    den = []
    for v in itertools.product(range(n), repeat=r):
        wp = math.prod(w[list(v)].tolist())
        num.append(wp * float(g(*(pts[i] for i in v))))
        den.append(wp)
    return math.fsum(num) / math.fsum(den)


def sn_average(f, x_points, y_points, weights) -> float:
    """Self-normalized average: sum_i w_i sum_j f(x_i,y_j) / (m sum_i w_i)."""
    xp, w, n = _stat_inputs(x_points, weights, 1)
    yp = as_points(y_points)
    m = yp.shape[0]
    terms = [
        w[i] * float(f(xp[i], yp[j])) for i in range(n) for j in range(m)
    ]
    return math.fsum(terms) / (m * math.fsum(w.tolist()))
