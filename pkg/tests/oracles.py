"""Independent reference implementations used only to produce expected values.

Everything here is deliberately written the slow, obvious way (explicit
loops, exact fsum accumulation, quadrature) and shares no code with the
package beyond numpy, so a test comparing the two sides is a real
cross-check rather than the same formula evaluated twice.
"""

import math

import numpy as np
from scipy import integrate


def rbf_oracle(gamma):
    def k(a, b):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        return math.exp(-float(np.sum((a - b) ** 2)) / (2.0 * gamma * gamma))

    return k


def mmd2_u_oracle(k, X, Y):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n, m = len(X), len(Y)
    first = math.fsum(
        k(X[i], X[j]) for i in range(n) for j in range(n) if i != j
    ) / (n * (n - 1))
    second = math.fsum(
        k(Y[i], Y[j]) for i in range(m) for j in range(m) if i != j
    ) / (m * (m - 1))
    cross = math.fsum(k(X[i], Y[j]) for i in range(n) for j in range(m))
    return first + second - 2.0 * cross / (n * m)


def mmd2_iw_oracle(k, X, w, Y):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    w = np.asarray(w, dtype=float)
    n, m = len(X), len(Y)
    first = math.fsum(
        w[i] * w[j] * k(X[i], X[j]) for i in range(n) for j in range(n) if i != j
    ) / (n * (n - 1))
    second = math.fsum(
        k(Y[i], Y[j]) for i in range(m) for j in range(m) if i != j
    ) / (m * (m - 1))
    cross = math.fsum(w[i] * k(X[i], Y[j]) for i in range(n) for j in range(m))
    return first + second - 2.0 * cross / (n * m)


def mmd2_sn_oracle(k, X, w, Y):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    w = np.asarray(w, dtype=float)
    n, m = len(X), len(Y)
    first_num = math.fsum(
        w[i] * w[j] * k(X[i], X[j]) for i in range(n) for j in range(n) if i != j
    )
    first_den = math.fsum(
        w[i] * w[j] for i in range(n) for j in range(n) if i != j
    )
    second = math.fsum(
        k(Y[i], Y[j]) for i in range(m) for j in range(m) if i != j
    ) / (m * (m - 1))
    cross = math.fsum(w[i] * k(X[i], Y[j]) for i in range(n) for j in range(m))
    return first_num / first_den + second - 2.0 * cross / (m * math.fsum(w))


def finite_difference_grad(f, Y0, h=1e-6):
    """Central differences of a scalar function of an (m, d) matrix."""
    Y0 = np.asarray(Y0, dtype=float)
    grad = np.zeros_like(Y0)
    for idx in np.ndindex(*Y0.shape):
        up = Y0.copy()
        up[idx] += h
        down = Y0.copy()
        down[idx] -= h
        grad[idx] = (f(up) - f(down)) / (2.0 * h)
    return grad


def gauss_rbf_mean_quad(gamma, mean1, var1, mean2, var2):
    """E k(X, Y) for independent 1-D normals, by double quadrature."""

    def phi(u, mu, v):
        return math.exp(-((u - mu) ** 2) / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)

    def inner(x):
        val, _ = integrate.quad(
            lambda y: math.exp(-((x - y) ** 2) / (2.0 * gamma * gamma))
            * phi(y, mean2, var2),
            mean2 - 12.0 * math.sqrt(var2),
            mean2 + 12.0 * math.sqrt(var2),
            limit=200,
        )
        return val * phi(x, mean1, var1)

    val, _ = integrate.quad(
        inner,
        mean1 - 12.0 * math.sqrt(var1),
        mean1 + 12.0 * math.sqrt(var1),
        limit=200,
    )
    return val
