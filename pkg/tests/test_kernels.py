import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from wmmd.errors import ContractError, InputError
from wmmd.kernels import (
    KernelSpec,
    evaluate,
    grad_y,
    grad_y_sum,
    gram,
    linear_bounded,
    median_heuristic,
    pair_evaluate,
    rbf,
    rbf_mixture,
)

from .oracles import finite_difference_grad, rbf_oracle

points_1d = hnp.arrays(
    np.float64, st.integers(2, 12),
    elements=st.floats(-50, 50, allow_nan=False, allow_infinity=False),
)


def finite_matrix(n_range=(2, 10), d_range=(1, 4), span=20.0):
    return st.integers(*n_range).flatmap(
        lambda n: st.integers(*d_range).flatmap(
            lambda d: hnp.arrays(
                np.float64, (n, d),
                elements=st.floats(-span, span, allow_nan=False, allow_infinity=False),
            )
        )
    )


class TestEvaluate:
    def test_zero_distance_is_one(self):
        assert evaluate(rbf(1.0), [0.3, -2.0], [0.3, -2.0]) == 1.0

    def test_hand_value(self):
        # ||x - y||^2 = 4, bandwidth 1 -> exp(-2)
        assert evaluate(rbf(1.0), [0.0], [2.0]) == pytest.approx(
            0.1353352832366127, abs=1e-15
        )

    def test_mixture_is_convex_combination(self):
        spec = rbf_mixture([1.0, 2.0], [0.5, 0.5])
        expected = 0.5 * math.exp(-2.0) + 0.5 * math.exp(-0.5)
        assert evaluate(spec, [0.0], [2.0]) == pytest.approx(expected, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            evaluate(rbf(1.0), [0.0, 1.0], [2.0])

    @given(finite_matrix(n_range=(2, 6)))
    def test_symmetric_and_bounded(self, X):
        spec = rbf_mixture([0.7, 2.5], [0.3, 0.7])
        for i in range(len(X)):
            for j in range(len(X)):
                v = evaluate(spec, X[i], X[j])
                assert 0.0 <= v <= spec.bound
                assert v == pytest.approx(evaluate(spec, X[j], X[i]), abs=1e-15)


class TestSpecValidation:
    def test_bad_family(self):
        with pytest.raises(InputError):
            KernelSpec(family="laplace")

    def test_nonpositive_bandwidth(self):
        with pytest.raises(InputError):
            rbf(0.0)

    def test_mixture_weights_must_sum_to_one(self):
        with pytest.raises(InputError):
            rbf_mixture([1.0, 2.0], [0.6, 0.6])

    def test_rbf_bound_is_one(self):
        with pytest.raises(InputError):
            KernelSpec(family="rbf", bandwidths=(1.0,), bound=2.0)

    def test_linear_bounded_bound(self):
        spec = linear_bounded(2.0, 3)
        assert spec.bound == 12.0


class TestGram:
    def test_single_point(self):
        K = gram(rbf(1.0), np.array([[1.5, 2.0]]), np.array([[1.5, 2.0]]))
        assert K.shape == (1, 1) and K[0, 0] == 1.0

    def test_two_point_values(self):
        K = gram(rbf(1.0), np.array([[0.0], [2.0]]), np.array([[0.0], [2.0]]))
        e2 = math.exp(-2.0)
        assert np.allclose(K, [[1.0, e2], [e2, 1.0]], atol=1e-15, rtol=0)

    def test_cross_gram_transpose(self, rng):
        X = rng.normal(size=(5, 3))
        Y = rng.normal(size=(3, 3))
        spec = rbf(1.3)
        assert np.allclose(gram(spec, X, Y), gram(spec, Y, X).T, atol=1e-13, rtol=0)

    def test_psd_smallest_eigenvalue(self, rng):
        for spec in (rbf(0.8), rbf_mixture([0.5, 1.5, 4.0], [0.2, 0.5, 0.3])):
            X = rng.normal(size=(20, 2))
            eigs = np.linalg.eigvalsh(gram(spec, X, X))
            assert eigs.min() >= -1e-8

    def test_linear_bounded_clips(self):
        spec = linear_bounded(1.0, 1)
        K = gram(spec, np.array([[5.0]]), np.array([[0.5]]))
        assert K[0, 0] == 0.5  # x clipped to 1.0
        assert abs(evaluate(spec, [5.0], [-7.0])) <= spec.bound

    def test_pair_evaluate_matches_gram_diagonal(self, rng):
        X = rng.normal(size=(6, 2))
        Y = rng.normal(size=(6, 2))
        spec = rbf_mixture([0.9, 3.0], [0.4, 0.6])
        expected = np.diag(gram(spec, X, Y))
        assert np.allclose(pair_evaluate(spec, X, Y), expected, atol=1e-15, rtol=0)


class TestGradY:
    def test_zero_at_equal_points(self):
        g = grad_y(rbf(1.0), [1.0, 2.0], [1.0, 2.0])
        assert np.all(g == 0.0)

    def test_hand_value(self):
        g = grad_y(rbf(1.0), [0.0], [2.0])
        assert g[0] == pytest.approx(-2.0 * math.exp(-2.0), abs=1e-15)

    def test_linear_bounded_rejected(self):
        with pytest.raises(ContractError):
            grad_y(linear_bounded(1.0, 2), [0.0, 0.0], [1.0, 1.0])

    @pytest.mark.parametrize("spec", [rbf(0.9), rbf_mixture([0.6, 2.0], [0.25, 0.75])])
    def test_matches_finite_differences(self, spec, rng):
        for _ in range(5):
            x = rng.normal(size=3)
            y = x + rng.normal(scale=0.8, size=3)
            analytic = grad_y(spec, x, y)
            numeric = finite_difference_grad(
                lambda Y: evaluate(spec, x, Y[0]), y[None, :]
            )[0]
            assert np.linalg.norm(analytic - numeric) <= 1e-5 * max(
                np.linalg.norm(analytic), 1e-12
            )

    def test_grad_y_sum_matches_loop(self, rng):
        spec = rbf_mixture([0.8, 1.7], [0.5, 0.5])
        X = rng.normal(size=(5, 2))
        Y = rng.normal(size=(4, 2))
        c = rng.uniform(0.5, 2.0, size=5)
        fast = grad_y_sum(spec, X, Y, c)
        slow = np.array(
            [
                np.sum([c[i] * grad_y(spec, X[i], Y[j]) for i in range(5)], axis=0)
                for j in range(4)
            ]
        )
        assert np.allclose(fast, slow, atol=1e-12, rtol=0)


class TestMedianHeuristic:
    def test_two_points(self):
        assert median_heuristic(np.array([[0.0], [2.0]])) == pytest.approx(
            math.sqrt(2.0), abs=1e-15
        )

    def test_three_collinear_points(self):
        # pairwise squared distances {1, 4, 9}; median 4 -> sqrt(2)
        got = median_heuristic(np.array([[0.0], [1.0], [3.0]]))
        assert got == pytest.approx(math.sqrt(2.0), abs=1e-15)

    def test_lower_median_for_even_pair_count(self):
        # 4 points -> 6 pairs; sorted d2 = {1, 1, 4, 9, 16, 25}: lower median 4
        got = median_heuristic(np.array([[0.0], [1.0], [2.0], [5.0]]))
        assert got == pytest.approx(math.sqrt(4.0 / 2.0), abs=1e-15)

    @given(points_1d, st.floats(0.1, 10.0))
    def test_scale_homogeneity(self, xs, c):
        pts = xs[:, None]
        try:
            base = median_heuristic(pts)
        except InputError:
            return  # degenerate draw
        assert median_heuristic(c * pts) == pytest.approx(c * base, rel=1e-9)

    def test_degenerate_sample(self):
        with pytest.raises(InputError, match="degenerate sample"):
            median_heuristic(np.array([[1.0], [1.0], [1.0]]))

    def test_needs_two_points(self):
        with pytest.raises(InputError):
            median_heuristic(np.array([[1.0]]))


def test_rbf_oracle_agrees_with_evaluate(rng):
    k = rbf_oracle(1.4)
    spec = rbf(1.4)
    for _ in range(10):
        a, b = rng.normal(size=2), rng.normal(size=2)
        assert evaluate(spec, a, b) == pytest.approx(k(a, b), abs=1e-14)
