"""Positive-definite kernels: evaluation, Gram blocks, gradients, bandwidth.

The radial basis function kernel is parameterized as

    k(x, y) = exp(-||x - y||^2 / (2 * gamma^2))

so that its supremum is exactly 1 and the gradient with respect to the
second argument is k(x, y) * (x - y) / gamma^2.  A mixture of such
kernels with convex weights keeps the supremum at 1.  The clipped linear
kernel exists only to exercise generic weighted statistics with a
non-radial, signed kernel; it is never used where a [0, K] range is
assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, InputError
from .samples import as_points

RBF = "rbf"
RBF_MIXTURE = "rbf-mixture"
LINEAR_BOUNDED = "linear-bounded"

_FAMILIES = (RBF, RBF_MIXTURE, LINEAR_BOUNDED)
_MIXTURE_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, bandwidth(s) and the uniform bound K = sup |k|."""

    family: str
    bandwidths: tuple[float, ...] = (1.0,)
    mixture_weights: tuple[float, ...] | None = None
    bound: float = 1.0
    box_halfwidth: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InputError(f"unknown kernel family {self.family!r}")
        bw = tuple(float(b) for b in self.bandwidths)
        if self.family != LINEAR_BOUNDED:
            if len(bw) < 1:
                raise InputError("at least one bandwidth required")
            if any(b <= 0.0 or not math.isfinite(b) for b in bw):
                raise InputError("bandwidths must be positive and finite")
        object.__setattr__(self, "bandwidths", bw)
        if self.family == RBF_MIXTURE:
            if self.mixture_weights is None:
                raise InputError("rbf-mixture requires mixture weights")
            mw = tuple(float(w) for w in self.mixture_weights)
            if len(mw) != len(bw):
                raise InputError("one mixture weight per bandwidth required")
            if any(w < 0.0 for w in mw):
                raise InputError("mixture weights must be nonnegative")
            if abs(sum(mw) - 1.0) > _MIXTURE_WEIGHT_TOL:
                raise InputError("mixture weights must sum to 1 within 1e-12")
            object.__setattr__(self, "mixture_weights", mw)
        if self.family in (RBF, RBF_MIXTURE) and self.bound != 1.0:
            raise InputError("rbf families have bound exactly 1")
        if self.family == LINEAR_BOUNDED:
            if self.box_halfwidth is None or self.box_halfwidth <= 0.0:
                raise InputError("linear-bounded requires a positive box halfwidth")
        if self.bound <= 0.0:
            raise InputError("kernel bound must be positive")


def rbf(gamma: float = 1.0) -> KernelSpec:
    """Single radial basis function kernel with bandwidth gamma."""
    return KernelSpec(family=RBF, bandwidths=(float(gamma),))


def rbf_mixture(gammas, weights) -> KernelSpec:
    """Convex mixture of rbf kernels; weights must sum to 1."""
    return KernelSpec(
        family=RBF_MIXTURE,
        bandwidths=tuple(float(g) for g in gammas),
        mixture_weights=tuple(float(w) for w in weights),
    )


def linear_bounded(halfwidth: float, dim: int) -> KernelSpec:
    """Inner-product kernel on points clipped into [-halfwidth, halfwidth]^dim.

    The clipping gives the finite bound K = dim * halfwidth^2 on |k|.
    """
    return KernelSpec(
        family=LINEAR_BOUNDED,
        bandwidths=(),
        bound=float(dim) * float(halfwidth) ** 2,
        box_halfwidth=float(halfwidth),
    )


def _components(spec: KernelSpec):
    if spec.family == RBF:
        return ((1.0, spec.bandwidths[0]),)
    return tuple(zip(spec.mixture_weights, spec.bandwidths))


def squared_distances(X, Y) -> np.ndarray:
    """Pairwise squared Euclidean distances between rows, clamped at 0."""
    X = as_points(X)
    Y = as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise InputError(
            f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}"
        )
    xx = np.einsum("ij,ij->i", X, X)[:, None]
    yy = np.einsum("ij,ij->i", Y, Y)[None, :]
    d2 = xx + yy - 2.0 * (X @ Y.T)
    return np.maximum(d2, 0.0)


def gram(spec: KernelSpec, X, Y) -> np.ndarray:
    """Gram block: entry (i, j) = k(x_i, y_j)."""
    X = as_points(X)
    Y = as_points(Y)
    if spec.family == LINEAR_BOUNDED:
        b = spec.box_halfwidth
        return np.clip(X, -b, b) @ np.clip(Y, -b, b).T
    d2 = squared_distances(X, Y)
    out = np.zeros_like(d2)
    for w, g in _components(spec):
        out += w * np.exp(d2 / (-2.0 * g * g))
    return out


def evaluate(spec: KernelSpec, x, y) -> float:
    """k(x, y) for two single points."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(gram(spec, x[None, :], y[None, :])[0, 0])


def pair_evaluate(spec: KernelSpec, A, B) -> np.ndarray:
    """Row-wise kernel values k(a_i, b_i) for equal-length point lists."""
    A = as_points(A)
    B = as_points(B)
    if A.shape != B.shape:
        raise InputError(f"shape mismatch: {A.shape} vs {B.shape}")
    if spec.family == LINEAR_BOUNDED:
        b = spec.box_halfwidth
        return np.einsum("ij,ij->i", np.clip(A, -b, b), np.clip(B, -b, b))
    d2 = np.maximum(np.einsum("ij,ij->i", A - B, A - B), 0.0)
    out = np.zeros_like(d2)
    for w, g in _components(spec):
        out += w * np.exp(d2 / (-2.0 * g * g))
    return out


def grad_y(spec: KernelSpec, x, y) -> np.ndarray:
    """Gradient of k(x, y) in its second argument (rbf families only)."""
    if spec.family not in (RBF, RBF_MIXTURE):
        raise ContractError(
            f"analytic gradient is only defined for rbf families, not {spec.family!r}"
        )
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape} vs {y.shape}")
    d2 = float(np.sum((x - y) ** 2))
    out = np.zeros_like(y)
    for w, g in _components(spec):
        out += (w * math.exp(d2 / (-2.0 * g * g)) / (g * g)) * (x - y)
    return out


def grad_y_sum(spec: KernelSpec, X, Y, coeffs) -> np.ndarray:
    """For every row y_j: sum_i coeffs_i * grad_y k(x_i, y_j).

    Returns an (m, d) matrix.  Used to assemble loss gradients where each
    source point x_i contributes with its own scalar coefficient.
    """
    if spec.family not in (RBF, RBF_MIXTURE):
        raise ContractError(
            f"analytic gradient is only defined for rbf families, not {spec.family!r}"
        )
    X = as_points(X)
    Y = as_points(Y)
    c = np.asarray(coeffs, dtype=np.float64).reshape(-1)
    if c.shape[0] != X.shape[0]:
        raise InputError("one coefficient per source point required")
    d2 = squared_distances(X, Y)
    out = np.zeros_like(Y)
    for w, g in _components(spec):
        K = (w / (g * g)) * np.exp(d2 / (-2.0 * g * g)) * c[:, None]
        out += K.T @ X - K.sum(axis=0)[:, None] * Y
    return out


def median_heuristic(X) -> float:
    """Bandwidth sqrt(median(||x_i - x_j||^2) / 2) over distinct pairs.

    The lower median is taken when the pair count is even.  All-zero
    pairwise distances (every point identical) make the bandwidth
    degenerate and raise an input error.
    """
    X = as_points(X)
    n = X.shape[0]
    if n < 2:
        raise InputError("median heuristic needs at least 2 points")
    d2 = squared_distances(X, X)
    iu = np.triu_indices(n, k=1)
    pair_d2 = np.sort(d2[iu])
    med = float(pair_d2[(pair_d2.shape[0] - 1) // 2])
    if med <= 0.0:
        raise InputError("degenerate sample: median pairwise distance is zero")
    return math.sqrt(med / 2.0)
