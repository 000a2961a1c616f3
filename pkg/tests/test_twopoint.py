import math

import numpy as np
import pytest

from ppboot import (
    IntegrationSpec,
    KernelFunction,
    ParameterError,
    PointPattern,
    constant_pair_function,
    distinct_index_sums,
    estimate_product_density,
    kernel_pair_function,
    s_moments_poisson,
    simulate_homogeneous_poisson,
    two_point_statistic,
    unit_square,
)
from ppboot.rng import RngSeed

from conftest import brute_force_sums, pair_values, random_pattern, random_smooth_pair_function


class TestKernels:
    @pytest.mark.parametrize("kind", ["box", "epanechnikov"])
    @pytest.mark.parametrize("b", [0.01, 0.1, 1.7])
    def test_unit_mass(self, kind, b):
        k = KernelFunction(kind, b)
        assert abs(k.integral_check() - 1.0) < 1e-6

    def test_zero_outside_support(self):
        k = KernelFunction("box", 0.2)
        assert k(0.21) == 0.0 and k(-5.0) == 0.0
        assert k(0.0) == pytest.approx(1 / 0.4)

    def test_validation(self):
        with pytest.raises(ParameterError):
            KernelFunction("triangle", 0.1)
        with pytest.raises(ParameterError):
            KernelFunction("box", 0.0)


class TestPairFunction:
    def test_symmetry_on_random_pairs(self):
        rng = np.random.default_rng(10)
        for trial in range(20):
            f = random_smooth_pair_function(rng)
            x, y = rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)
            assert float(f(x, y)) == pytest.approx(float(f(y, x)), rel=1e-12)

    def test_zero_outside_window(self):
        f = random_smooth_pair_function(np.random.default_rng(11))
        assert float(f(np.array([1.5, 0.5]), np.array([0.5, 0.5]))) == 0.0
        assert float(f(np.array([0.5, 0.5]), np.array([0.5, -0.1]))) == 0.0

    def test_kernel_pair_function_needs_positive_r(self):
        with pytest.raises(ParameterError):
            kernel_pair_function(KernelFunction("box", 0.1), -0.3, unit_square())


class TestTwoPointStatistic:
    def test_no_pairs(self):
        empty = PointPattern(np.empty((0, 2)), unit_square())
        single = PointPattern(np.array([[0.5, 0.5]]), unit_square())
        f = constant_pair_function(unit_square())
        assert two_point_statistic(empty, f) == 0.0
        assert two_point_statistic(single, f) == 0.0

    def test_constant_f_counts_ordered_pairs(self):
        rng = np.random.default_rng(12)
        pat = random_pattern(17, rng)
        f = constant_pair_function(unit_square())
        assert two_point_statistic(pat, f) == pytest.approx(17 * 16, rel=1e-12)

    def test_matches_independent_double_loop(self):
        rng = np.random.default_rng(13)
        pat = random_pattern(8, rng)
        f = kernel_pair_function(KernelFunction("box", 0.4), 0.5, unit_square())
        by_loop = math.fsum(
            float(f(pat.points[i], pat.points[j]))
            for i in range(8) for j in range(8) if i != j
        )
        assert two_point_statistic(pat, f) == pytest.approx(by_loop, rel=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(14)
        pat = random_pattern(11, rng)
        f = random_smooth_pair_function(rng)
        perm = rng.permutation(11)
        shuffled = PointPattern(pat.points[perm], pat.window)
        assert two_point_statistic(pat, f) == pytest.approx(
            two_point_statistic(shuffled, f), rel=1e-10
        )


class TestProductDensity:
    def test_empty_pattern(self):
        empty = PointPattern(np.empty((0, 2)), unit_square())
        table = estimate_product_density(empty, [0.05, 0.1], KernelFunction("box", 0.01))
        assert np.all(table[:, 1] == 0.0)

    def test_two_point_value(self):
        # two points at distance d, evaluated at r = d: each ordered pair
        # contributes K_b(0) = 1/(2b), normalized by 2 pi d area
        d, b = 0.3, 0.05
        pat = PointPattern(np.array([[0.2, 0.5], [0.2 + d, 0.5]]), unit_square())
        table = estimate_product_density(pat, [d], KernelFunction("box", b))
        expected = 2 * (1 / (2 * b)) / (2 * np.pi * d * 1.0)
        assert table[0, 1] == pytest.approx(expected, rel=1e-12)

    def test_invalid_radius(self):
        pat = random_pattern(5, np.random.default_rng(15))
        with pytest.raises(ParameterError):
            estimate_product_density(pat, [0.0, 0.1], KernelFunction("box", 0.01))

    def test_translation_and_relabeling_invariance(self):
        rng = np.random.default_rng(16)
        pat = random_pattern(40, rng)
        kernel = KernelFunction("epanechnikov", 0.03)
        r = [0.05, 0.12, 0.2]
        base = estimate_product_density(pat, r, kernel)
        moved = estimate_product_density(pat.translate(3.0, -7.0), r, kernel)
        perm = rng.permutation(40)
        relabeled = estimate_product_density(PointPattern(pat.points[perm], pat.window), r, kernel)
        np.testing.assert_allclose(moved[:, 1], base[:, 1], rtol=1e-10)
        np.testing.assert_allclose(relabeled[:, 1], base[:, 1], rtol=1e-10)

    def test_mean_matches_integrated_expectation(self):
        # E rho_hat(r) = lam^2 * I(f) / (2 pi r); the Monte Carlo integral
        # of the pair function is an independent oracle for the edge factor
        lam, r, b = 200.0, 0.05, 0.01
        window = unit_square()
        f = kernel_pair_function(KernelFunction("box", b), r, window)
        m = s_moments_poisson(1.0, window, f,
                              IntegrationSpec("monte_carlo", sample_count=20_000_000,
                                              seed=RngSeed(201)))
        target = lam**2 * m.e_theta / (2 * np.pi * r)
        reps = 2000
        seed = RngSeed(202)
        kernel = KernelFunction("box", b)
        values = np.empty(reps)
        for rep in range(reps):
            pat = simulate_homogeneous_poisson(lam, window, seed.substream(rep))
            values[rep] = estimate_product_density(pat, [r], kernel)[0, 1]
        assert abs(values.mean() / target - 1.0) < 0.10


class TestDistinctIndexSums:
    def test_too_few_points(self):
        f = constant_pair_function(unit_square())
        empty = PointPattern(np.empty((0, 2)), unit_square())
        sums = distinct_index_sums(empty, f)
        assert (sums.P, sums.T3, sums.Q4, sums.R) == (0, 0, 0, 0)
        two = random_pattern(2, np.random.default_rng(17))
        s2 = distinct_index_sums(two, f)
        assert s2.T3 == 0.0 and s2.Q4 == 0.0
        three = random_pattern(3, np.random.default_rng(18))
        s3 = distinct_index_sums(three, f)
        assert s3.Q4 == pytest.approx(0.0, abs=1e-9)

    def test_constant_f_tuple_counts(self):
        n = 9
        pat = random_pattern(n, np.random.default_rng(19))
        sums = distinct_index_sums(pat, constant_pair_function(unit_square()))
        assert sums.P == pytest.approx(n * (n - 1), rel=1e-12)
        assert sums.R == pytest.approx(n * (n - 1), rel=1e-12)
        assert sums.T3 == pytest.approx(n * (n - 1) * (n - 2), rel=1e-12)
        assert sums.Q4 == pytest.approx(n * (n - 1) * (n - 2) * (n - 3), rel=1e-10)

    def test_matches_brute_force_enumeration(self):
        rng = np.random.default_rng(20)
        for trial in range(10):
            n = int(rng.integers(4, 11))
            pat = random_pattern(n, rng)
            f = random_smooth_pair_function(rng)
            fast = distinct_index_sums(pat, f)
            p, t3, q4, r = brute_force_sums(pair_values(pat, f))
            scale = max(abs(p), abs(t3), abs(q4), abs(r), 1.0)
            assert abs(fast.P - p) / scale < 1e-9
            assert abs(fast.T3 - t3) / scale < 1e-9
            assert abs(fast.Q4 - q4) / scale < 1e-9
            assert abs(fast.R - r) / scale < 1e-9

    def test_decomposition_identity_on_enumerated_tuples(self):
        # all four sums enumerated directly over the 4-index product
        # tensor (no reuse of the quadratic identity), then the identity
        # P^2 = Q4 + 4 T3 + 2 R and agreement with the fast path checked
        rng = np.random.default_rng(21)
        for n in (5, 18, 34, 50):
            pat = random_pattern(n, rng)
            f = random_smooth_pair_function(rng)
            mat = np.zeros((n, n))
            for i in range(n):
                for j in range(n):
                    if i != j:
                        mat[i, j] = float(f(pat.points[i], pat.points[j]))
            idx = np.arange(n)
            i_ = idx[:, None, None, None]
            j_ = idx[None, :, None, None]
            k_ = idx[None, None, :, None]
            l_ = idx[None, None, None, :]
            distinct4 = (
                (i_ != j_) & (i_ != k_) & (i_ != l_)
                & (j_ != k_) & (j_ != l_) & (k_ != l_)
            )
            tensor4 = mat[:, :, None, None] * mat[None, None, :, :]
            q4 = float(tensor4[distinct4].sum())
            distinct3 = (i_ != j_) & (i_ != k_) & (j_ != k_)
            tensor3 = mat[:, :, None] * mat[:, None, :]
            t3 = float(tensor3[distinct3[..., 0]].sum())
            p = float(mat.sum())
            r = float((mat * mat).sum())
            scale = max(p * p, 1.0)
            assert abs(p * p - (q4 + 4 * t3 + 2 * r)) / scale < 1e-9
            fast = distinct_index_sums(pat, f)
            assert fast.P == pytest.approx(p, rel=1e-10)
            assert fast.R == pytest.approx(r, rel=1e-10)
            assert fast.T3 == pytest.approx(t3, rel=1e-9)
            assert abs(fast.Q4 - q4) / scale < 1e-9
