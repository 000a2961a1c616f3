import numpy as np
import pytest
from scipy import stats

from ppboot import (
    DuplicatePointError,
    IntensityFunction,
    Interval1,
    InvalidBoundError,
    OutOfWindowError,
    ParameterError,
    PointPattern,
    Window2,
    constant_intensity,
    count_points_in,
    linear_intensity,
    simulate_homogeneous_poisson,
    simulate_inhomogeneous_poisson,
    unit_square,
)
from ppboot.rng import RngSeed


class TestWindows:
    def test_area(self):
        assert Window2(0, 2, 0, 3).area == 6

    @pytest.mark.parametrize("bad", [(1, 1, 0, 1), (0, 1, 2, 2), (2, 1, 0, 1)])
    def test_degenerate_window_rejected(self, bad):
        with pytest.raises(ParameterError):
            Window2(*bad)

    def test_degenerate_interval_rejected(self):
        with pytest.raises(ParameterError):
            Interval1(0.5, 0.5)

    def test_contains(self):
        w = unit_square()
        mask = w.contains(np.array([[0.5, 0.5], [1.5, 0.5]]))
        assert mask.tolist() == [True, False]


class TestPointPattern:
    def test_out_of_window_rejected(self):
        with pytest.raises(OutOfWindowError):
            PointPattern(np.array([[0.5, 0.5], [1.2, 0.1]]), unit_square())

    def test_duplicates_rejected(self):
        with pytest.raises(DuplicatePointError):
            PointPattern(np.array([[0.5, 0.5], [0.5, 0.5]]), unit_square())

    def test_n_and_dim(self):
        p2 = PointPattern(np.array([[0.1, 0.2]]), unit_square())
        assert p2.n == 1 and p2.dim == 2
        p1 = PointPattern(np.array([0.3, 0.7]), Interval1(0, 1))
        assert p1.n == 2 and p1.dim == 1

    def test_translate_moves_window_and_points(self):
        p = PointPattern(np.array([[0.1, 0.2]]), unit_square()).translate(5.0, -1.0)
        assert p.window.x_min == 5.0 and p.points[0, 0] == pytest.approx(5.1)


class TestHomogeneousSimulation:
    def test_zero_intensity_gives_empty_pattern(self):
        assert simulate_homogeneous_poisson(0.0, unit_square(), RngSeed(1)).n == 0

    def test_negative_or_nonfinite_intensity_rejected(self):
        with pytest.raises(ParameterError):
            simulate_homogeneous_poisson(-1.0, unit_square(), RngSeed(1))
        with pytest.raises(ParameterError):
            simulate_homogeneous_poisson(float("inf"), unit_square(), RngSeed(1))

    def test_fixed_seed_reproduces_identical_pattern(self):
        a = simulate_homogeneous_poisson(100.0, unit_square(), RngSeed(42))
        b = simulate_homogeneous_poisson(100.0, unit_square(), RngSeed(42))
        assert np.array_equal(a.points, b.points)

    def test_different_streams_differ(self):
        a = simulate_homogeneous_poisson(100.0, unit_square(), RngSeed(42, (1,)))
        b = simulate_homogeneous_poisson(100.0, unit_square(), RngSeed(42, (2,)))
        assert not np.array_equal(a.points, b.points)

    def test_count_moments_match_poisson(self):
        # Poisson(100): mean 100 (3-sigma band), variance 100 (4-sigma band)
        reps = 10_000
        seed = RngSeed(2024)
        counts = np.array([
            simulate_homogeneous_poisson(100.0, unit_square(), seed.substream(r)).n
            for r in range(reps)
        ])
        se_mean = np.sqrt(100.0 / reps)
        assert abs(counts.mean() - 100.0) < 3 * se_mean
        kappa_minus_1 = 2.0 + 1.0 / 100.0
        se_var = np.sqrt(kappa_minus_1 * 100.0**2 / reps)
        assert abs(counts.var(ddof=1) - 100.0) < 4 * se_var

    def test_points_inside_and_distinct(self):
        pat = simulate_homogeneous_poisson(500.0, Window2(-1, 2, 3, 5), RngSeed(9))
        assert bool(np.all(pat.window.contains(pat.points)))
        assert len(np.unique(pat.points, axis=0)) == pat.n


class TestInhomogeneousSimulation:
    def test_zero_intensity_gives_empty_pattern(self):
        pat = simulate_inhomogeneous_poisson(constant_intensity(0.0), Interval1(0, 1), RngSeed(3))
        assert pat.n == 0

    def test_constant_intensity_count_is_poisson(self):
        # thinning a constant intensity must reduce to the homogeneous law;
        # chi-square goodness of fit on counts at the 1% level
        mu = 40.0
        reps = 10_000
        seed = RngSeed(78)
        counts = np.array([
            simulate_inhomogeneous_poisson(constant_intensity(mu), Interval1(0, 1),
                                           seed.substream(r)).n
            for r in range(reps)
        ])
        lo, hi = int(stats.poisson.ppf(0.001, mu)), int(stats.poisson.ppf(0.999, mu))
        edges = list(range(lo, hi + 1))
        observed = np.array(
            [np.sum(counts <= lo)]
            + [np.sum(counts == k) for k in edges[1:-1]]
            + [np.sum(counts >= hi)]
        )
        expected = np.array(
            [stats.poisson.cdf(lo, mu)]
            + [stats.poisson.pmf(k, mu) for k in edges[1:-1]]
            + [stats.poisson.sf(hi - 1, mu)]
        ) * reps
        stat = np.sum((observed - expected) ** 2 / expected)
        p_value = stats.chi2.sf(stat, len(observed) - 1)
        assert p_value > 0.01

    def test_linear_intensity_mean_count(self):
        # integral of 50 + 20x over (0,1) is 60
        reps = 10_000
        seed = RngSeed(88)
        intensity = linear_intensity(50.0, 20.0, Interval1(0, 1))
        counts = np.array([
            simulate_inhomogeneous_poisson(intensity, Interval1(0, 1), seed.substream(r)).n
            for r in range(reps)
        ])
        assert abs(counts.mean() - 60.0) < 3 * np.sqrt(60.0 / reps)

    def test_thinning_matches_direct_homogeneous_locations(self):
        # pooled locations from thinned constant-intensity runs vs uniform draws
        seed = RngSeed(5150)
        thinned = np.concatenate([
            simulate_inhomogeneous_poisson(constant_intensity(40.0), Interval1(0, 1),
                                           seed.substream(0, r)).points
            for r in range(200)
        ])
        direct = seed.substream(1).generator().uniform(0, 1, thinned.size)
        assert stats.ks_2samp(thinned, direct).pvalue > 0.01

    def test_declared_bound_violation_detected(self):
        lying = IntensityFunction(lambda x: 30.0 + 50.0 * np.asarray(x), lambda_max=40.0)
        with pytest.raises(InvalidBoundError):
            simulate_inhomogeneous_poisson(lying, Interval1(0, 1), RngSeed(4))

    def test_negative_intensity_detected(self):
        negative = IntensityFunction(lambda x: -np.ones_like(np.asarray(x)), lambda_max=10.0)
        with pytest.raises(ParameterError):
            simulate_inhomogeneous_poisson(negative, Interval1(0, 1), RngSeed(4))


class TestCountPointsIn:
    def test_empty_pattern(self):
        pat = PointPattern(np.empty(0), Interval1(0, 1))
        assert count_points_in(pat, Interval1(0.4, 0.6)) == 0

    def test_direct_count(self):
        pat = PointPattern(np.array([0.1, 0.5, 0.9]), Interval1(0, 1))
        assert count_points_in(pat, Interval1(0.4, 0.6)) == 1

    def test_closed_boundaries(self):
        pat = PointPattern(np.array([0.4, 0.6]), Interval1(0, 1))
        assert count_points_in(pat, Interval1(0.4, 0.6)) == 2


class TestIntensityFunctions:
    def test_linear_negative_on_interval_rejected(self):
        with pytest.raises(ParameterError):
            linear_intensity(1.0, -10.0, Interval1(0, 1))

    def test_integral(self):
        intensity = linear_intensity(50.0, 20.0, Interval1(0, 1))
        assert intensity.integral(0.0, 1.0) == pytest.approx(60.0, rel=1e-12)

    def test_lambda_max_validation(self):
        with pytest.raises(ParameterError):
            IntensityFunction(lambda x: x, lambda_max=float("nan"))
