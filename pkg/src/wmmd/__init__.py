"""Weighted squared-MMD estimation under biased sampling.

Estimators of the squared maximum mean discrepancy from importance-
weighted samples (plain, median-of-means, self-normalized, upsampling
baseline), generic weighted U/V/average statistics, analytic tail and
variance bounds with Monte-Carlo verification, kernel ridge regression
of unknown weights from labeled subsets, and gradient-descent trainers
that recover a target distribution from thinned observations.
"""

from .bounds import (
    BoundParams,
    TailRow,
    VarianceReport,
    empirical_tail,
    empirical_variance,
    estimate_pair_variance,
    iw_tail_bound,
    iw_tail_rows,
    mom_tail_bound,
    mom_tail_rows,
    pair_variance_bound,
    weighted_pair_terms,
)
from .errors import (
    ContractError,
    InputError,
    NumericalError,
    ResourceError,
    TrainingDivergence,
    WmmdError,
)
from .estimators import (
    ESTIMATOR_KINDS,
    EstimateReport,
    EstimatorConfig,
    estimate,
    mmd2_iw,
    mmd2_miw,
    mmd2_sn,
    mmd2_u,
    mmd2_upsample,
    sn_average,
    sn_u_stat,
    sn_v_stat,
    weighted_average,
    weighted_u_stat,
    weighted_v_stat,
)
from .flow import (
    GeneratorState,
    TrainConfig,
    TrainReport,
    affine_init,
    grad_mmd2_wrt_y,
    particle_init,
    train,
)
from .kernels import (
    KernelSpec,
    evaluate,
    grad_y,
    gram,
    linear_bounded,
    median_heuristic,
    rbf,
    rbf_mixture,
)
from .samples import SampleSet
from .scenarios import (
    ScenarioData,
    ScenarioSpec,
    TailScenario,
    gaussian_rbf_mean,
    gaussian_rbf_mmd2,
    sample_fig1,
    sample_latent,
    sample_scenario,
    tail_scenario,
    thin_rejection,
    thinned_gauss,
)
from .seeding import derive_seed
from .weightmodel import LabeledWeights, WeightModel, fit, predict

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
