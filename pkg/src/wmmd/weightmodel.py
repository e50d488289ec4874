"""Estimating importance weights from a small labeled subset.

When the thinning mechanism is unknown, a practitioner can label a few
points with how strongly each is under-represented (any positive scale
will do, since the self-normalized estimator cancels a common factor).
This module propagates those labels to the full dataset with kernel
ridge regression in log-weight space:

    (G + ridge * I) alpha = log(labels),   w(x) = exp(sum_i alpha_i k(x_i, x))

Regressing the log guarantees positive predictions without truncation;
the multiplicative floor below is purely a numerical guard.  With
ridge -> infinity the coefficients vanish and every prediction shrinks
to exp(0) = 1, the neutral weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .kernels import KernelSpec, gram, median_heuristic, rbf
from .samples import as_points

DEFAULT_FLOOR = 1e-3
# Mild shrinkage per labeled point; keeps near-duplicate labels stable.
DEFAULT_RIDGE_PER_LABEL = 1e-3


@dataclass(frozen=True)
class LabeledWeights:
    """A few points with user-assessed positive weight labels."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = as_points(self.points)
        labels = np.asarray(self.labels, dtype=np.float64).reshape(-1)
        if pts.shape[0] < 1:
            raise InputError("at least one labeled point required")
        if labels.shape[0] != pts.shape[0]:
            raise InputError("one label per point required")
        if not np.all(np.isfinite(labels)) or np.any(labels <= 0.0):
            raise InputError("labels must be positive and finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def count(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class WeightModel:
    kernel: KernelSpec
    ridge: float
    alpha: np.ndarray
    train_points: np.ndarray
    floor: float = DEFAULT_FLOOR


def fit(
    data: LabeledWeights,
    ridge: float | None = None,
    bandwidth: float | None = None,
    floor: float = DEFAULT_FLOOR,
) -> WeightModel:
    """Kernel ridge regression of log labels.

    The bandwidth defaults to the median heuristic on the labeled points
    (or 1.0 when that is undefined); the ridge defaults to 1e-3 per
    labeled point.  With ridge = 0 duplicate labeled points make the
    system singular.
    """
    if ridge is None:
        ridge = DEFAULT_RIDGE_PER_LABEL * data.count
    if ridge < 0.0:
        raise InputError("ridge must be >= 0")
    if floor <= 0.0:
        raise InputError("prediction floor must be positive")
    if bandwidth is None:
        try:
            bandwidth = median_heuristic(data.points)
        except InputError:
            bandwidth = 1.0
    spec = rbf(bandwidth)
    G = gram(spec, data.points, data.points)
    target = np.log(data.labels)
    try:
        alpha = np.linalg.solve(G + ridge * np.eye(data.count), target)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "singular kernel system; duplicate labeled points need ridge > 0"
        ) from exc
    return WeightModel(
        kernel=spec, ridge=float(ridge), alpha=alpha,
        train_points=data.points, floor=float(floor),
    )


def predict(model: WeightModel, X) -> np.ndarray:
    """Positive weight predictions max(floor, exp(K alpha)) for rows of X."""
    pts = as_points(X)
    log_w = gram(model.kernel, pts, model.train_points) @ model.alpha
    return np.maximum(model.floor, np.exp(log_w))
