"""Weighted sample containers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

# |w * m - 1| tolerance when both a weight and a modifier column are supplied.
CONSISTENCY_TOL = 1e-9


def as_points(data) -> np.ndarray:
    """Coerce a SampleSet, vector or matrix to an (n, d) float64 matrix."""
    if isinstance(data, SampleSet):
        return data.points
    pts = np.asarray(data, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise InputError(f"points must be 1-D or 2-D, got ndim={pts.ndim}")
    return pts


def _positive_vector(values, name: str, n: int) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.shape[0] != n:
        raise InputError(f"{name} length {v.shape[0]} does not match n={n}")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name} contain NaN or Inf")
    if np.any(v <= 0.0):
        raise InputError(f"{name} must be strictly positive")
    return v


@dataclass(frozen=True)
class SampleSet:
    """n points in d dimensions with optional per-point importance weights.

    ``weights`` are reciprocal modifier values: a large weight marks a
    point that is under-represented in the observed data.  ``modifiers``
    stores the modifier itself.  Supplying either one derives the other
    as its reciprocal; supplying both requires w * m = 1 within 1e-9.
    """

    points: np.ndarray
    weights: np.ndarray | None = None
    modifiers: np.ndarray | None = None

    def __post_init__(self):
        pts = as_points(self.points)
        if pts.shape[0] == 0:
            raise InputError("empty sample")
        if not np.all(np.isfinite(pts)):
            raise InputError("points contain NaN or Inf")
        object.__setattr__(self, "points", pts)

        n = pts.shape[0]
        w = self.weights
        m = self.modifiers
        if w is not None:
            w = _positive_vector(w, "weights", n)
        if m is not None:
            m = _positive_vector(m, "modifiers", n)
        if w is not None and m is not None:
            if np.max(np.abs(w * m - 1.0)) > CONSISTENCY_TOL:
                raise InputError(
                    "weights and modifiers are inconsistent: w*m must equal 1 "
                    f"within {CONSISTENCY_TOL}"
                )
        elif w is not None:
            m = 1.0 / w
        elif m is not None:
            w = 1.0 / m
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "modifiers", m)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def require_weights(self, context: str = "this estimator") -> np.ndarray:
        if self.weights is None:
            raise InputError(f"{context} requires per-point weights")
        return self.weights

    def require_modifiers(self, context: str = "this estimator") -> np.ndarray:
        if self.modifiers is None:
            raise InputError(f"{context} requires per-point modifier values")
        return self.modifiers
