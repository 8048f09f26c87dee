import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lebesgue_lab.errors import DomainError
from lebesgue_lab.kernel import (
    EvalPoint,
    KernelSpec,
    TruncatedGaussian,
    check_first_arch_domination,
    gaussian_distribution_function,
    eval_gaussian,
    eval_kernel,
    gaussian_values,
    kernel_slope,
    kernel_values,
)

# high-precision evaluations of the closed forms (40-digit arithmetic)
G_6_AT_TWELFTH = 0.6439505508593789  # 1 / (6 sin(pi/12))
Y_LAST_8 = 0.0707355302630646  # 2 / (9 pi)
X_C_8 = 0.16360439554922646
Y_LAST_9 = 0.057874524760689216  # 2 / (11 pi)
X_C_9 = 0.15058361555032753
F_HALF_8 = 0.08369172460136572  # sqrt(2 log 2 / (63 pi))


class TestKernelSpec:
    def test_accepts_small_lengths(self):
        assert KernelSpec(2).l == 2

    @pytest.mark.parametrize("bad", [1, 0, -3, 2.5, True])
    def test_rejects_bad_lengths(self, bad):
        with pytest.raises(DomainError):
            KernelSpec(bad)


class TestEvalG:
    def test_value_at_origin_is_one(self):
        assert eval_kernel(KernelSpec(8), 0.0) == 1.0

    def test_first_zero(self):
        assert abs(eval_kernel(KernelSpec(8), 1.0 / 8.0)) <= 1e-14

    def test_half_period_value(self):
        assert eval_kernel(KernelSpec(6), 1.0 / 12.0) == pytest.approx(G_6_AT_TWELFTH, abs=1e-14)

    @pytest.mark.parametrize("x", [-0.1, 0.5000001, 1.0])
    def test_domain_errors(self, x):
        with pytest.raises(DomainError):
            eval_kernel(KernelSpec(8), x)

    @pytest.mark.parametrize("l", [2, 5, 8, 13, 50, 101])
    def test_zeros_at_multiples(self, l):
        spec = KernelSpec(l)
        for k in range(1, l // 2 + 1):
            assert abs(eval_kernel(spec, k / l)) <= 1e-14

    @given(
        st.integers(min_value=2, max_value=500),
        st.floats(min_value=0.0, max_value=0.5),
    )
    def test_bounded_by_one(self, l, x):
        v = eval_kernel(KernelSpec(l), x)
        assert 0.0 <= v <= 1.0

    def test_series_branch_matches_direct_branch(self):
        # compare just above and below the series cutoff
        l = 37
        lo, hi = 0.9e-8, 1.1e-8
        vals = kernel_values(l, np.array([lo, hi]))
        expected = math.sin(l * math.pi * hi) / (l * math.sin(math.pi * hi))
        assert vals[1] == pytest.approx(expected, rel=1e-13)
        assert vals[0] == pytest.approx(1.0, abs=1e-12)

    def test_slope_matches_finite_difference(self):
        spec = KernelSpec(11)
        for x in (0.031, 0.17, 0.342, 0.49):
            h = 1e-7
            fd = (eval_kernel(spec, x + h) - eval_kernel(spec, x - h)) / (2 * h)
            sl = kernel_slope(spec, x)
            assert abs(abs(sl) - abs(fd)) <= 1e-5 * max(1.0, abs(sl))


class TestTruncatedGaussian:
    def test_even_floor_level(self):
        tg = TruncatedGaussian.from_length(8)
        assert tg.y_last == pytest.approx(Y_LAST_8, abs=1e-16)
        assert tg.x_c == pytest.approx(X_C_8, abs=1e-15)

    def test_odd_floor_level(self):
        tg = TruncatedGaussian.from_length(9)
        assert tg.y_last == pytest.approx(Y_LAST_9, abs=1e-16)
        assert tg.x_c == pytest.approx(X_C_9, abs=1e-15)

    @pytest.mark.parametrize("l", range(6, 201))
    def test_cutoff_consistency(self, l):
        tg = TruncatedGaussian.from_length(l)
        recon = math.exp(-math.pi * (l * l - 1) * tg.x_c**2 / 2.0)
        assert recon == pytest.approx(tg.y_last, rel=1e-12)

    def test_gaussian_at_origin(self):
        assert eval_gaussian(TruncatedGaussian.from_length(8), 0.0) == 1.0

    def test_value_at_cutoff(self):
        tg = TruncatedGaussian.from_length(8)
        assert eval_gaussian(tg, tg.x_c) == pytest.approx(tg.y_last, abs=1e-12)

    def test_zero_beyond_cutoff(self):
        tg = TruncatedGaussian.from_length(8)
        assert eval_gaussian(tg, tg.x_c + 1e-9) == 0.0

    def test_negative_abscissa_rejected(self):
        with pytest.raises(DomainError):
            eval_gaussian(TruncatedGaussian.from_length(8), -1e-9)

    @given(st.integers(min_value=2, max_value=300), st.floats(min_value=0.0, max_value=1.0))
    def test_bounded_by_one(self, l, x):
        assert 0.0 <= eval_gaussian(TruncatedGaussian.from_length(l), x) <= 1.0


class TestClosedFormF:
    def test_mid_level_value(self):
        tg = TruncatedGaussian.from_length(8)
        assert gaussian_distribution_function(tg, 0.5) == pytest.approx(F_HALF_8, abs=1e-15)

    def test_constant_below_floor(self):
        tg = TruncatedGaussian.from_length(8)
        assert gaussian_distribution_function(tg, tg.y_last / 2) == tg.x_c
        assert gaussian_distribution_function(tg, 1e-9) == tg.x_c

    def test_vanishes_near_one(self):
        tg = TruncatedGaussian.from_length(8)
        assert gaussian_distribution_function(tg, 0.999999) == pytest.approx(0.0, abs=1e-3)

    @pytest.mark.parametrize("y", [0.0, 1.0, -0.2, 1.4])
    def test_domain_errors(self, y):
        with pytest.raises(DomainError):
            gaussian_distribution_function(TruncatedGaussian.from_length(8), y)

    def test_monotone_nonincreasing(self):
        tg = TruncatedGaussian.from_length(9)
        ys = np.geomspace(1e-6, 1 - 1e-6, 400)
        vals = [gaussian_distribution_function(tg, y) for y in ys]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("l", [6, 7, 8, 9])
    def test_matches_measured_distribution_of_f(self, l):
        # independent oracle: measure {f > y} by bisecting f on [0, x_c]
        tg = TruncatedGaussian.from_length(l)
        for y in np.geomspace(1e-3, 1 - 1e-6, 100):
            if y < tg.y_last:
                measured = tg.x_c
            else:
                lo, hi = 0.0, tg.x_c
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if eval_gaussian(tg, mid) > y:
                        lo = mid
                    else:
                        hi = mid
                measured = 0.5 * (lo + hi)
            assert gaussian_distribution_function(tg, y) == pytest.approx(measured, abs=1e-8)


class TestFirstArchDomination:
    def test_small_length_grid(self):
        report = check_first_arch_domination(KernelSpec(2), 1000)
        assert report.ok and report.violation_count == 0
        assert report.max_diff < 0.0
        # right endpoint: the kernel vanishes while the gaussian does not
        assert eval_kernel(KernelSpec(2), 0.5) <= 1e-14
        assert gaussian_values(2, np.array([0.5]))[0] == pytest.approx(
            math.exp(-3 * math.pi / 8), rel=1e-15
        )

    @pytest.mark.parametrize("l", [6, 50])
    def test_dense_grids(self, l):
        report = check_first_arch_domination(KernelSpec(l), 10_000)
        assert report.ok and report.violation_count == 0

    def test_rejects_tiny_grid(self):
        with pytest.raises(DomainError):
            check_first_arch_domination(KernelSpec(6), 1)


class TestEvalPoint:
    def test_accepts_valid(self):
        EvalPoint(0.25, 0.7)

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            EvalPoint(0.25, 1.5)
        with pytest.raises(DomainError):
            EvalPoint(0.75, 0.5)
