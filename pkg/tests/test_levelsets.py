import math

import numpy as np
import pytest

from lebesgue_lab.errors import DomainError, PreconditionError
from lebesgue_lab.kernel import KernelSpec, TruncatedGaussian, kernel_values
from lebesgue_lab.levelsets import (
    bump_profiles,
    check_derivative_bounds,
    detect_sign_change,
    level_crossings,
    superlevel_measure,
    superlevel_measure_many,
    comparison_functional,
    slope_sum,
)

PI = math.pi


class TestBumpProfiles:
    @pytest.mark.parametrize("l", [6, 7, 8, 9, 12, 15])
    def test_peak_between_edge_values(self, l):
        profs = bump_profiles(KernelSpec(l))
        for prof in profs[1:]:
            m = prof.index
            if prof.peak_x == prof.x_hi:
                continue  # odd-l half arch handled below
            lo = 1.0 / (l * math.sin(PI * (m + 0.5) / l))
            hi = 1.0 / (l * math.sin(PI * m / l))
            assert lo - 1e-12 <= prof.peak_y <= hi + 1e-12

    @pytest.mark.parametrize("l", [6, 7, 8, 9, 12, 15])
    def test_peaks_strictly_decreasing(self, l):
        profs = bump_profiles(KernelSpec(l))
        peaks = [p.peak_y for p in profs]
        assert all(a > b for a, b in zip(peaks, peaks[1:]))

    @pytest.mark.parametrize("l", [7, 9, 15])
    def test_odd_half_arch_peaks_at_one_half(self, l):
        last = bump_profiles(KernelSpec(l))[-1]
        assert last.peak_x == 0.5
        assert last.peak_y == pytest.approx(1.0 / l, rel=1e-14)

    @pytest.mark.parametrize("l", range(6, 17))
    def test_peak_floor_claim(self, l):
        # every arch peak sits above 1/(pi (m + 1/2))
        for prof in bump_profiles(KernelSpec(l))[1:]:
            assert prof.peak_y >= 1.0 / (PI * (prof.index + 0.5)) - 1e-12

    @pytest.mark.parametrize("l", range(6, 31))
    def test_first_peak_below_log_concavity_threshold(self, l):
        y1 = bump_profiles(KernelSpec(l))[1].peak_y
        cap = 1.0 / (l * math.sin(PI / l))
        assert y1 <= cap + 1e-15
        assert cap < 1.0 / math.sqrt(math.e)


class TestMeasureG:
    def test_matches_grid_counting_oracle(self):
        # fraction of 1e7 uniform samples of [0, 1/2] above the level, halved
        spec = KernelSpec(8)
        y = 0.05
        n = 10_000_000
        xs = (np.arange(n) + 0.5) * (0.5 / n)
        oracle = 0.5 * float(np.mean(kernel_values(8, xs) > y))
        assert superlevel_measure(spec, y) == pytest.approx(oracle, abs=5e-7)

    def test_tiny_superlevel_set_near_one(self):
        spec = KernelSpec(8)
        v = superlevel_measure(spec, 0.999)
        assert 0.0 < v < 1.0 / 8.0

    def test_approaches_half_at_zero(self):
        assert superlevel_measure(KernelSpec(8), 1e-6) == pytest.approx(0.5, abs=1e-3)
        assert superlevel_measure(KernelSpec(9), 1e-6) == pytest.approx(0.5, abs=1e-3)

    @pytest.mark.parametrize("l", [6, 9, 14])
    def test_monotone_nonincreasing(self, l):
        spec = KernelSpec(l)
        ys = np.geomspace(1e-5, 1 - 1e-6, 300)
        vals = superlevel_measure_many(spec, ys)
        assert np.all(np.diff(vals) <= 1e-14)

    def test_batch_equals_scalar(self):
        spec = KernelSpec(9)
        ys = np.geomspace(1e-3, 0.9, 50)
        batch = superlevel_measure_many(spec, ys)
        scalar = np.array([superlevel_measure(spec, y) for y in ys])
        assert np.array_equal(batch, scalar)

    @pytest.mark.parametrize("y", [0.0, 1.0, -0.5])
    def test_domain_errors(self, y):
        with pytest.raises(DomainError):
            superlevel_measure(KernelSpec(8), y)


class TestLevelCrossings:
    def test_census_matches_dense_sign_scan(self):
        # oracle: count sign changes of g - y on a 1e5-point grid
        spec = KernelSpec(8)
        profs = bump_profiles(spec)
        y = 0.5 * (profs[1].peak_y + profs[2].peak_y)
        roots, _, _ = level_crossings(spec, y)
        xs = np.linspace(0.0, 0.5, 100_001)
        signs = np.sign(kernel_values(8, xs) - y)
        nz = signs[signs != 0]
        flips = int(np.count_nonzero(nz[:-1] * nz[1:] < 0))
        assert len(roots) == flips == 3

    def test_roots_solve_the_equation(self):
        spec = KernelSpec(9)
        y = 0.09
        roots, _, _ = level_crossings(spec, y)
        assert np.all(np.abs(kernel_values(9, roots) - y) < 1e-12)


class TestSignChange:
    @pytest.mark.parametrize("l", [6, 8])
    def test_single_crossing(self, l):
        report = detect_sign_change(KernelSpec(l))
        assert report.crossings == 1
        assert report.F0_lt_G0
        assert report.G_lt_F_above_y1

    def test_crossing_level_sits_between_floor_and_first_peak(self):
        spec = KernelSpec(8)
        report = detect_sign_change(spec)
        tg = TruncatedGaussian.from_length(8)
        y1 = bump_profiles(spec)[1].peak_y
        assert tg.y_last < report.y0 < y1

    def test_odd_length(self):
        report = detect_sign_change(KernelSpec(9))
        assert report.crossings == 1

    def test_difference_brackets_zero_around_y0(self):
        spec = KernelSpec(8)
        tg = TruncatedGaussian.from_length(8)
        report = detect_sign_change(spec)
        from lebesgue_lab.kernel import gaussian_distribution_function

        delta = 1e-3
        below = gaussian_distribution_function(tg, report.y0 - delta) - superlevel_measure(spec, report.y0 - delta)
        above = gaussian_distribution_function(tg, report.y0 + delta) - superlevel_measure(spec, report.y0 + delta)
        assert below < 0.0 < above

    def test_short_scan_rejected(self):
        with pytest.raises(PreconditionError):
            detect_sign_change(KernelSpec(8), np.geomspace(1e-3, 0.9, 100))

    def test_small_length_reports_without_asserting(self):
        report = detect_sign_change(KernelSpec(4))
        assert report.l == 4  # no exception even if the pattern differs


class TestPhi:
    def test_nonnegative_at_base_exponent(self):
        spec = KernelSpec(6)
        y0 = detect_sign_change(spec).y0
        assert comparison_functional(spec, 2.0, y0) >= 0.0

    def test_nondecreasing_in_p(self):
        spec = KernelSpec(8)
        y0 = detect_sign_change(spec).y0
        values = [comparison_functional(spec, p, y0) for p in (2.0, 3.0, 4.0, 6.0, 8.0, 12.0)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_rejects_small_exponent(self):
        with pytest.raises(PreconditionError):
            comparison_functional(KernelSpec(8), 1.5, 0.2)


class TestSlopeBounds:
    def test_mid_band_census_even(self):
        spec = KernelSpec(8)
        profs = bump_profiles(spec)
        y = 0.5 * (profs[1].peak_y + profs[2].peak_y)
        check = check_derivative_bounds(spec, y)
        assert check.band == 1
        assert check.root_count == check.expected_roots == 3
        assert check.ok

    def test_band_above_floor_even(self):
        spec = KernelSpec(6)
        tg = TruncatedGaussian.from_length(6)
        y = tg.y_last * 1.05
        check = check_derivative_bounds(spec, y)
        assert check.band == 2
        assert check.root_count == 5  # one on the lead-in plus two per full arch

    def test_band_above_floor_odd(self):
        spec = KernelSpec(9)
        tg = TruncatedGaussian.from_length(9)
        y = tg.y_last * 1.05
        check = check_derivative_bounds(spec, y)
        assert check.band == 4
        assert check.root_count == 2 * 4  # final half arch carries a single root

    def test_exclusion_window(self):
        spec = KernelSpec(8)
        y1 = bump_profiles(spec)[1].peak_y
        with pytest.raises(PreconditionError):
            check_derivative_bounds(spec, y1 - 1e-12)

    def test_level_outside_band_range(self):
        spec = KernelSpec(8)
        with pytest.raises(PreconditionError):
            check_derivative_bounds(spec, 0.5)

    def test_small_length_rejected(self):
        with pytest.raises(PreconditionError):
            check_derivative_bounds(KernelSpec(5), 0.2)

    @pytest.mark.parametrize("l", [6, 9, 12])
    def test_slope_sum_matches_finite_difference(self, l):
        spec = KernelSpec(l)
        profs = bump_profiles(spec)
        for frac in (0.3, 0.7):
            y = profs[2].peak_y + frac * (profs[1].peak_y - profs[2].peak_y)
            h = 1e-6 * y
            fd = -(superlevel_measure(spec, y + h) - superlevel_measure(spec, y - h)) / (2.0 * h)
            assert fd == pytest.approx(slope_sum(spec, y), rel=1e-4)
