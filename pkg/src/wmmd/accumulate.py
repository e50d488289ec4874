"""Deterministic compensated reduction.

Every estimator in this package is defined as a sum of kernel terms
taken in a fixed row-major order and accumulated sequentially with
Kahan compensation.  Fixing the order (and compensating) makes exact
reduction identities meaningful: e.g. the importance-weighted estimator
with unit weights reproduces the unweighted estimator bit for bit,
because both run the identical reduction over identical term matrices.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _kahan(values):
    total = 0.0
    carry = 0.0
    for i in range(values.shape[0]):
        y = values[i] - carry
        t = total + y
        carry = (t - total) - y
        total = t
    return total


def kahan_sum(values) -> float:
    """Sum of ``values`` in row-major order with Kahan compensation."""
    flat = np.ascontiguousarray(values, dtype=np.float64).reshape(-1)
    return float(_kahan(flat))
