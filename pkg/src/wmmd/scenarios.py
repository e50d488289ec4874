"""Synthetic scenarios: biased sampling constructions with known ground truth.

Two training scenarios are shipped:

``fig1-1d``
    1-D target: equal mixture of N(-2, 0.5^2) and N(2, 0.5^2).  The
    observed sample is thinned by the modifier M(x) = 1/(1+exp(-2x)),
    which suppresses the left mode, so unweighted training recovers the
    thinned distribution while weighted training recovers the target.

``latent-thinning``
    Latent coordinates theta in (0,1)^10 mapped linearly to D observed
    dimensions by a fixed Gaussian matrix F (x = theta^T F).  Under the
    target every latent coordinate is Uniform(0,1); in the observed data
    the first latent coordinate has density 2*theta, i.e. modifier
    M = 2*theta_1 and weight w = 1/(2*theta_1).

Tail scenarios (for bound verification) pair a rejection-thinned
standard normal against a shifted normal, where the squared MMD has a
closed form under an rbf kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .errors import InputError
from .kernels import KernelSpec, rbf
from .samples import SampleSet, as_points
from .seeding import derive_seed

SCENARIO_FIG1 = "fig1-1d"
SCENARIO_LATENT = "latent-thinning"
SCENARIO_NAMES = (SCENARIO_FIG1, SCENARIO_LATENT)


@dataclass(frozen=True)
class ScenarioSpec:
    """Name, sizes and seed of a training scenario."""

    name: str
    n_target: int = 512
    n_observed: int = 256
    dim: int = 2
    latent_dim: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.name not in SCENARIO_NAMES:
            raise InputError(f"unknown scenario {self.name!r}")
        if self.n_target < 4 or self.n_observed < 4:
            raise InputError("scenario sample sizes must be at least 4")
        if self.dim < 1:
            raise InputError("dimension must be >= 1")


@dataclass(frozen=True)
class ScenarioData:
    """Target sample, thinned observed sample (with weights) and metadata."""

    target: SampleSet
    observed: SampleSet
    mapping: np.ndarray | None = None
    train_kernel: KernelSpec | None = None


# -- rejection thinning ------------------------------------------------------


def thin_rejection(points, modifier, seed: int) -> SampleSet:
    """Keep each point with probability M(x); attach weights 1/M to survivors.

    ``modifier`` is either a callable mapping an (n, d) matrix to values
    in (0, 1] or a precomputed vector of such values.
    """
    pts = as_points(points)
    if callable(modifier):
        m_vals = np.asarray(modifier(pts), dtype=np.float64).reshape(-1)
    else:
        m_vals = np.asarray(modifier, dtype=np.float64).reshape(-1)
    if m_vals.shape[0] != pts.shape[0]:
        raise InputError("one modifier value per point required")
    if np.any(m_vals <= 0.0) or np.any(m_vals > 1.0 + 1e-12):
        raise InputError("modifier values must lie in (0, 1]")
    m_vals = np.minimum(m_vals, 1.0)
    rng = np.random.default_rng(seed)
    keep = rng.uniform(size=pts.shape[0]) < m_vals
    if not np.any(keep):
        raise InputError("rejection thinning kept no points")
    return SampleSet(pts[keep], modifiers=m_vals[keep])


def _rejection_fixed_size(rng, sampler: Callable, modifier: Callable, n: int):
    """Draw from the thinned distribution until n points are accepted."""
    kept_pts = []
    kept_m = []
    total = 0
    while total < n:
        block = sampler(rng, max(2 * n, 64))
        m_vals = np.asarray(modifier(block), dtype=np.float64).reshape(-1)
        keep = rng.uniform(size=block.shape[0]) < m_vals
        kept_pts.append(block[keep])
        kept_m.append(m_vals[keep])
        total += int(keep.sum())
    pts = np.concatenate(kept_pts)[:n]
    m_vals = np.concatenate(kept_m)[:n]
    return pts, m_vals


# -- fig1-1d -----------------------------------------------------------------

FIG1_MODES = (-2.0, 2.0)
FIG1_MODE_STD = 0.5
# Bandwidth used for training on this scenario; the mode separation is 4,
# so a unit bandwidth keeps cross-mode kernel interactions alive.
FIG1_TRAIN_BANDWIDTH = 1.0
# Particle initialization wide enough to seed both modes.
FIG1_INIT_CENTER = 0.0
FIG1_INIT_SPREAD = 2.0


def fig1_modifier(points) -> np.ndarray:
    """Acceptance probability 1/(1+exp(-2x)): keeps the right mode, thins the left.

    Its expectation under the (symmetric) target is exactly 1/2, so the
    observed density is 2 * modifier * target density and the exact
    importance weight of a surviving point is 1 / (2 * modifier).
    """
    x = as_points(points)[:, 0]
    return 1.0 / (1.0 + np.exp(-2.0 * x))


# E[fig1_modifier] under the symmetric bimodal target.
FIG1_ACCEPTANCE_MASS = 0.5


def fig1_target_density(x: np.ndarray) -> np.ndarray:
    """Density of the bimodal target (equal mixture of two normals)."""
    x = np.asarray(x, dtype=np.float64)
    s = FIG1_MODE_STD
    out = np.zeros_like(x)
    for mu in FIG1_MODES:
        out += 0.5 * np.exp(-((x - mu) ** 2) / (2 * s * s)) / (s * math.sqrt(2 * math.pi))
    return out


def _sample_fig1_target(rng, n: int) -> np.ndarray:
    comp = rng.integers(0, 2, size=n)
    means = np.asarray(FIG1_MODES)[comp]
    return (means + FIG1_MODE_STD * rng.standard_normal(n))[:, None]


def sample_fig1(spec: ScenarioSpec) -> ScenarioData:
    """Draw the bimodal target and its logistic-thinned observed sample."""
    if spec.name != SCENARIO_FIG1:
        raise InputError(f"expected scenario {SCENARIO_FIG1!r}")
    rng_t = np.random.default_rng(derive_seed(spec.seed, 1))
    target = SampleSet(_sample_fig1_target(rng_t, spec.n_target))
    rng_o = np.random.default_rng(derive_seed(spec.seed, 2))
    pts, m_vals = _rejection_fixed_size(
        rng_o, _sample_fig1_target, fig1_modifier, spec.n_observed
    )
    observed = SampleSet(pts, weights=FIG1_ACCEPTANCE_MASS / m_vals)
    return ScenarioData(
        target=target, observed=observed, train_kernel=rbf(FIG1_TRAIN_BANDWIDTH)
    )


# -- latent-thinning ---------------------------------------------------------


def sample_latent(spec: ScenarioSpec) -> ScenarioData:
    """Draw the latent-thinning scenario.

    The mapping F is (latent_dim, dim) with N(0,1) entries, fixed by the
    seed independently of the sample draws.  Observed latent first
    coordinates are sqrt(U) (inverse CDF of the density 2*theta), the
    rest Uniform(0,1); weights are 1/(2*theta_1).
    """
    if spec.name != SCENARIO_LATENT:
        raise InputError(f"expected scenario {SCENARIO_LATENT!r}")
    L = spec.latent_dim
    rng_f = np.random.default_rng(derive_seed(spec.seed, 0))
    F = rng_f.standard_normal((L, spec.dim))

    rng_t = np.random.default_rng(derive_seed(spec.seed, 1))
    theta_t = rng_t.uniform(size=(spec.n_target, L))
    target = SampleSet(theta_t @ F)

    rng_o = np.random.default_rng(derive_seed(spec.seed, 2))
    theta_o = rng_o.uniform(size=(spec.n_observed, L))
    theta_o[:, 0] = np.sqrt(rng_o.uniform(size=spec.n_observed))
    observed = SampleSet(theta_o @ F, weights=1.0 / (2.0 * theta_o[:, 0]))
    return ScenarioData(target=target, observed=observed, mapping=F)


def sample_scenario(spec: ScenarioSpec) -> ScenarioData:
    if spec.name == SCENARIO_FIG1:
        return sample_fig1(spec)
    return sample_latent(spec)


# -- closed-form rbf/Gaussian reference --------------------------------------


def gaussian_rbf_mean(gamma: float, mean1: float, var1: float, mean2: float, var2: float) -> float:
    """E k(X, Y) for X ~ N(mean1, var1), Y ~ N(mean2, var2), rbf bandwidth gamma.

    X - Y is normal with mean mean1-mean2 and variance var1+var2, and for
    Z ~ N(mu, s2):  E exp(-Z^2/(2 gamma^2))
        = sqrt(gamma^2/(gamma^2+s2)) * exp(-mu^2 / (2(gamma^2+s2))).
    """
    g2 = gamma * gamma
    s2 = var1 + var2
    mu = mean1 - mean2
    return math.sqrt(g2 / (g2 + s2)) * math.exp(-mu * mu / (2.0 * (g2 + s2)))


def gaussian_rbf_mmd2(gamma: float, mean1: float, var1: float, mean2: float, var2: float) -> float:
    """Population squared MMD between two 1-D normals under an rbf kernel."""
    kxx = gaussian_rbf_mean(gamma, mean1, var1, mean1, var1)
    kyy = gaussian_rbf_mean(gamma, mean2, var2, mean2, var2)
    kxy = gaussian_rbf_mean(gamma, mean1, var1, mean2, var2)
    return kxx + kyy - 2.0 * kxy


# -- tail scenarios for bound verification -----------------------------------


@dataclass(frozen=True)
class TailScenario:
    """Samplers plus the analytic quantities needed to check tail bounds.

    ``draw(rng, m)`` returns (observed-with-weights, reference) samples
    of size m each.  The observed weights are exact density-ratio
    reciprocals (target over observed), so the weighted estimators are
    unbiased for ``true_mmd2``, the population squared MMD between the
    target and the reference.  ``acceptance_scale`` is the normalizer Z
    relating stored weights to the rejection acceptance probability:
    acceptance = Z / weight.
    """

    name: str
    kernel: KernelSpec
    true_mmd2: float
    weight_bound: float | None
    weight_second_moment: float | None
    _draw: Callable
    acceptance_scale: float | None = None

    def draw(self, rng, m: int) -> tuple[SampleSet, SampleSet]:
        return self._draw(rng, m)


def thinned_gauss(
    shift: float = 1.0,
    gamma: float = 1.0,
    floor: float = 1.0 / 7.0,
    quantized: bool = False,
    steepness: float = 1.0,
) -> TailScenario:
    """Thinned standard normal vs N(shift, 1).

    Points from N(0,1) survive rejection with acceptance probability
    a(x) = floor + (1-floor) * Phi(steepness * x), so the observed
    density is a p / Z with Z = E[a(X)] = (1+floor)/2 (any steepness, by
    symmetry).  The stored weights are the exact density ratio
    reciprocals w = Z / a, which keep the weighted estimators unbiased;
    they range over [Z, Z/floor], so the weight bound is W = Z/floor
    (exactly 4 at the default floor of 1/7).  At the default steepness
    the weight second moment under the observed distribution has the
    closed form E[w^2] = Z ln(1/floor) / (1-floor); otherwise it is
    computed by quadrature.  Large steepness approaches a hard left-tail
    cutoff, which maximizes the coupling between weights and kernel
    values (useful for exposing the self-normalized estimator's bias).

    With ``quantized=True`` the acceptance is rounded down to
    1/ceil(1/a), making every reciprocal acceptance an exact integer
    (the regime in which the upsampling baseline converges to the
    truth); the normalizer is then computed by quadrature.
    """
    if not (0.0 < floor < 1.0):
        raise InputError("floor must lie in (0, 1)")
    if steepness <= 0.0:
        raise InputError("steepness must be positive")

    def acceptance(pts: np.ndarray) -> np.ndarray:
        a = floor + (1.0 - floor) * ndtr(steepness * pts[:, 0])
        if quantized:
            a = 1.0 / np.ceil(1.0 / a - 1e-12)
        return a

    def _quad(f):
        from scipy import integrate

        val, _ = integrate.quad(
            lambda x: f(x) * math.exp(-x * x / 2.0) / math.sqrt(2.0 * math.pi),
            -12.0,
            12.0,
            limit=200,
        )
        return val

    if quantized:
        z = _quad(lambda x: acceptance(np.array([[x]]))[0])
        w2 = None  # no closed form for the quantized acceptance
    else:
        z = (1.0 + floor) / 2.0
        if steepness == 1.0:
            w2 = z * math.log(1.0 / floor) / (1.0 - floor)
        else:
            w2 = _quad(lambda x: z / acceptance(np.array([[x]]))[0])

    def sampler(rng, count: int) -> np.ndarray:
        return rng.standard_normal((count, 1))

    def draw(rng, m: int):
        pts, a_vals = _rejection_fixed_size(rng, sampler, acceptance, m)
        observed = SampleSet(pts, weights=z / a_vals)
        reference = SampleSet(shift + rng.standard_normal((m, 1)))
        return observed, reference

    name = "thinned-gauss-quantized" if quantized else "thinned-gauss"
    return TailScenario(
        name=name,
        kernel=rbf(gamma),
        true_mmd2=gaussian_rbf_mmd2(gamma, 0.0, 1.0, shift, 1.0),
        weight_bound=z / floor,
        weight_second_moment=w2,
        acceptance_scale=z,
        _draw=draw,
    )


def point_mass(dim: int = 1) -> TailScenario:
    """Degenerate scenario: both distributions are a point mass at zero."""

    def draw(rng, m: int):
        pts = np.zeros((m, dim))
        return SampleSet(pts, weights=np.ones(m)), SampleSet(pts.copy())

    return TailScenario(
        name="point-mass",
        kernel=rbf(1.0),
        true_mmd2=0.0,
        weight_bound=1.0,
        weight_second_moment=1.0,
        acceptance_scale=1.0,
        _draw=draw,
    )


TAIL_SCENARIOS = {
    "thinned-gauss": thinned_gauss,
    "thinned-gauss-strong": lambda: thinned_gauss(floor=0.02),
    "thinned-gauss-quantized": lambda: thinned_gauss(quantized=True),
    "point-mass": point_mass,
}


def tail_scenario(name: str) -> TailScenario:
    try:
        factory = TAIL_SCENARIOS[name]
    except KeyError:
        raise InputError(
            f"unknown tail scenario {name!r}; known: {sorted(TAIL_SCENARIOS)}"
        ) from None
    return factory()
