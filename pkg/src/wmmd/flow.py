"""Generative training by gradient descent on weighted squared-MMD losses.

Instead of a neural generator, two closed-form generators are trained:

particle
    The generated sample itself is the parameter; each step moves every
    point down the analytic gradient of the loss.

affine
    y = A z + b with z ~ Uniform(0,1)^L; gradients reach (A, b) through
    the chain rule.  This matches settings where the data were produced
    by a linear map from a latent box.

Only the generated sample enters the loss through the kernel terms

    2/(m(m-1)) sum_{i!=j} k(y_i, y_j)  -  c * sum_{i,j} w_i k(x_i, y_j)

so the gradient at y_j is assembled from the analytic rbf gradient.
For the median-of-means loss the step follows the gradient of the
median group's estimate alone (a subgradient of the piecewise-smooth
loss); ties pick the lowest group index.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .accumulate import kahan_sum
from .errors import ContractError, InputError, TrainingDivergence
from .estimators import _mmd2_sn_core, _mmd2_weighted_core, split_groups
from .kernels import RBF, RBF_MIXTURE, KernelSpec, grad_y_sum, rbf
from .samples import SampleSet, as_points
from .seeding import derive_seed

TRAIN_KINDS = ("u", "iw", "miw", "sn")
DEFAULT_LR = {"particle": 0.05, "affine": 1.0}


@dataclass
class GeneratorState:
    """Parameters of a particle or affine generator."""

    kind: str
    particles: np.ndarray | None = None
    mix: np.ndarray | None = None  # A, shape (dim, latent_dim)
    offset: np.ndarray | None = None  # b, shape (dim,)

    def __post_init__(self):
        if self.kind not in ("particle", "affine"):
            raise InputError(f"unknown generator kind {self.kind!r}")
        if self.kind == "particle":
            if self.particles is None or as_points(self.particles).shape[0] < 2:
                raise InputError("particle generator needs at least 2 particles")
            self.particles = np.array(as_points(self.particles), dtype=np.float64)
            if not np.all(np.isfinite(self.particles)):
                raise InputError("particles contain NaN or Inf")
        else:
            if self.mix is None or self.offset is None:
                raise InputError("affine generator needs a matrix and an offset")
            self.mix = np.array(self.mix, dtype=np.float64)
            self.offset = np.array(self.offset, dtype=np.float64).reshape(-1)
            if not (np.all(np.isfinite(self.mix)) and np.all(np.isfinite(self.offset))):
                raise InputError("affine parameters contain NaN or Inf")

    @property
    def latent_dim(self) -> int:
        if self.kind != "affine":
            raise InputError("latent dimension only defined for affine generators")
        return self.mix.shape[1]

    def generate(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "particle":
            return self.particles
        return z @ self.mix.T + self.offset


def particle_init(rng, count: int, dim: int, center=0.0, spread=1.0) -> GeneratorState:
    pts = np.asarray(center, dtype=np.float64) + spread * rng.standard_normal((count, dim))
    return GeneratorState(kind="particle", particles=pts)


def affine_init(rng, dim: int, latent_dim: int, scale: float = 0.5, offset=None) -> GeneratorState:
    A = scale * rng.standard_normal((dim, latent_dim))
    b = np.zeros(dim) if offset is None else np.asarray(offset, dtype=np.float64)
    return GeneratorState(kind="affine", mix=A, offset=b)


@dataclass(frozen=True)
class TrainConfig:
    """Estimator choice, generator kind, step size and loop parameters."""

    estimator: str = "iw"
    generator: str = "particle"
    kernel: KernelSpec = field(default_factory=rbf)
    lr: float | None = None
    iters: int = 500
    batch_size: int | None = None  # observed minibatch; None = full batch
    gen_size: int = 256  # particle count / generated batch per step
    latent_dim: int = 10
    groups: int = 5  # median-of-means group count during training
    seed: int = 0
    eval_every: int = 10
    eval_size: int = 512  # fresh draw size for the affine final report
    divergence_cap: float = 1e6

    def __post_init__(self):
        if self.estimator not in TRAIN_KINDS:
            raise InputError(f"unknown training estimator {self.estimator!r}")
        if self.generator not in ("particle", "affine"):
            raise InputError(f"unknown generator kind {self.generator!r}")
        if self.lr is not None and self.lr <= 0.0:
            raise InputError("learning rate must be positive")
        if self.iters < 1:
            raise InputError("iteration count must be >= 1")
        if self.gen_size < 2:
            raise InputError("generated batch must hold at least 2 points")
        if self.eval_every < 1:
            raise InputError("evaluation cadence must be >= 1")

    @property
    def step_size(self) -> float:
        return self.lr if self.lr is not None else DEFAULT_LR[self.generator]


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    loss: float
    mmd2_to_target: float
    mmd2_to_observed: float


@dataclass(frozen=True, eq=False)
class TrainReport:
    estimator: str
    generator: str
    iterations: int
    trace: tuple[TraceRow, ...]
    final_mmd2_target: float
    final_mmd2_observed: float
    wall_clock: float
    final_points: np.ndarray | None = None


def _require_rbf(spec: KernelSpec):
    if spec.family not in (RBF, RBF_MIXTURE):
        raise ContractError(
            "training gradients need an rbf-family kernel, "
            f"not {spec.family!r}"
        )


def _value_and_grad_plain(spec, x, w, y, sn: bool):
    n = x.shape[0]
    m = y.shape[0]
    if sn:
        value = _mmd2_sn_core(spec, x, w, y)
        cross_coeff = (2.0 / (m * kahan_sum(w))) * w
    else:
        value = _mmd2_weighted_core(spec, x, w, y)
        cross_coeff = (2.0 / (n * m)) * w
    grad = grad_y_sum(spec, y, y, np.full(m, 2.0 / (m * (m - 1))))
    grad -= grad_y_sum(spec, x, y, cross_coeff)
    return value, grad


def _value_and_grad(spec, x, w, y, kind: str, groups: int, seed: int):
    """Estimator value, raw gradient in y, and the per-particle mass scale.

    The scale is the generated count entering the active loss term (the
    group size for the median-of-means loss); multiplying the raw
    gradient by it gives per-particle velocities that do not shrink as
    the batch grows.
    """
    if kind in ("u", "iw"):
        value, grad = _value_and_grad_plain(spec, x, w, y, sn=False)
        return value, grad, y.shape[0]
    if kind == "sn":
        value, grad = _value_and_grad_plain(spec, x, w, y, sn=True)
        return value, grad, y.shape[0]
    # median-of-means: gradient of the median group's estimate only
    if x.shape[0] != y.shape[0]:
        raise InputError(
            "median-of-means training needs equal observed and generated "
            f"batch sizes (got {x.shape[0]} and {y.shape[0]})"
        )
    idx, k, _ = split_groups(x.shape[0], groups, seed)
    values = [
        _mmd2_weighted_core(spec, x[ix], w[ix], y[ix]) for ix in idx
    ]
    med_val = float(np.sort(values)[(k - 1) // 2])
    med = int(np.flatnonzero(np.asarray(values) == med_val)[0])
    ix = idx[med]
    _, sub_grad = _value_and_grad_plain(spec, x[ix], w[ix], y[ix], sn=False)
    grad = np.zeros_like(y)
    grad[ix] = sub_grad
    return med_val, grad, ix.shape[0]


def grad_mmd2_wrt_y(
    spec: KernelSpec,
    X: SampleSet,
    Y,
    kind: str = "iw",
    groups: int = 5,
    seed: int = 0,
) -> np.ndarray:
    """Gradient of the chosen squared-MMD estimator in the generated points.

    ``u`` uses unit weights; ``iw``/``sn``/``miw`` read weights from X.
    Returns an (m, d) matrix aligned with the rows of Y.
    """
    _require_rbf(spec)
    if kind not in TRAIN_KINDS:
        raise InputError(f"unknown estimator kind {kind!r}")
    y = as_points(Y)
    w = np.ones(X.n) if kind == "u" else X.require_weights(f"estimator {kind!r}")
    _, grad, _ = _value_and_grad(spec, X.points, w, y, kind, groups, seed)
    return grad


def train(
    config: TrainConfig,
    observed: SampleSet,
    target_holdout: SampleSet,
    init: GeneratorState | None = None,
) -> TrainReport:
    """Run seeded gradient descent and report distances to both samples.

    The loss per iteration is the configured estimator between the
    observed batch (with weights, unless ``u``) and the generated batch.
    Trace rows are recorded every ``eval_every`` iterations and at the
    final iteration; each carries the unweighted squared-MMD from the
    current generated sample to the target holdout and to the observed
    sample.  A loss above ``divergence_cap`` or a non-finite loss aborts
    with the partial trace attached.
    """
    _require_rbf(config.kernel)
    if not isinstance(observed, SampleSet) or not isinstance(target_holdout, SampleSet):
        raise InputError("train takes SampleSet inputs")
    x_all = observed.points
    w_all = (
        np.ones(observed.n)
        if config.estimator == "u"
        else observed.require_weights(f"estimator {config.estimator!r}")
    )
    batch = config.batch_size if config.batch_size is not None else observed.n
    if batch < 2 or batch > observed.n:
        raise InputError(f"batch size {batch} not in [2, {observed.n}]")
    if config.estimator == "miw" and batch != config.gen_size:
        raise InputError(
            "median-of-means training needs batch_size == gen_size "
            f"(got {batch} and {config.gen_size})"
        )

    state = init if init is not None else _default_init(config, observed)
    if state.kind != config.generator:
        raise InputError(
            f"init generator {state.kind!r} does not match config {config.generator!r}"
        )
    if state.kind == "affine":
        rng_z = np.random.default_rng(derive_seed(config.seed, 1))
        z_train = rng_z.uniform(size=(config.gen_size, state.latent_dim))

    lr = config.step_size
    spec = config.kernel
    trace: list[TraceRow] = []
    started = time.perf_counter()

    for it in range(config.iters):
        if batch == observed.n:
            xb, wb = x_all, w_all
        else:
            rng_b = np.random.default_rng(derive_seed(config.seed, 3 + 2 * it))
            pick = rng_b.choice(observed.n, size=batch, replace=False)
            xb, wb = x_all[pick], w_all[pick]
        y = state.generate(z_train if state.kind == "affine" else None)
        value, grad, mass_scale = _value_and_grad(
            spec, xb, wb, y, config.estimator, config.groups,
            derive_seed(config.seed, 4 + 2 * it),
        )
        if not np.isfinite(value) or value > config.divergence_cap:
            raise TrainingDivergence(
                f"loss diverged at iteration {it} (value {value!r})", trace=trace
            )
        if it % config.eval_every == 0 or it == config.iters - 1:
            trace.append(
                TraceRow(
                    iteration=it,
                    loss=float(value),
                    mmd2_to_target=_mmd2_weighted_core(
                        spec, y, np.ones(y.shape[0]), target_holdout.points
                    ),
                    mmd2_to_observed=_mmd2_weighted_core(
                        spec, y, np.ones(y.shape[0]), x_all
                    ),
                )
            )
        if state.kind == "particle":
            # per-particle velocity: the raw estimator gradient times the
            # particle mass scale, so step sizes do not shrink with m
            state.particles = state.particles - lr * mass_scale * grad
        else:
            state.mix = state.mix - lr * (grad.T @ z_train)
            state.offset = state.offset - lr * grad.sum(axis=0)

    if state.kind == "affine":
        rng_e = np.random.default_rng(derive_seed(config.seed, 2))
        z_eval = rng_e.uniform(size=(config.eval_size, state.latent_dim))
        y_final = state.generate(z_eval)
    else:
        y_final = state.particles
    ones = np.ones(y_final.shape[0])
    return TrainReport(
        estimator=config.estimator,
        generator=config.generator,
        iterations=config.iters,
        trace=tuple(trace),
        final_mmd2_target=_mmd2_weighted_core(spec, y_final, ones, target_holdout.points),
        final_mmd2_observed=_mmd2_weighted_core(spec, y_final, ones, x_all),
        wall_clock=time.perf_counter() - started,
        final_points=np.array(y_final),
    )


def _default_init(config: TrainConfig, observed: SampleSet) -> GeneratorState:
    """Seeded default initialization spread around the observed sample."""
    rng = np.random.default_rng(derive_seed(config.seed, 0))
    if config.generator == "particle":
        center = observed.points.mean(axis=0)
        spread = 2.5 * observed.points.std(axis=0).max() + 1e-12
        return particle_init(rng, config.gen_size, observed.dim, center, spread)
    return affine_init(
        rng,
        observed.dim,
        config.latent_dim,
        scale=0.5,
        offset=observed.points.mean(axis=0),
    )
