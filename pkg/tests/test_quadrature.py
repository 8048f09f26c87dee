import math

import numpy as np
import pytest

from lebesgue_lab.errors import DomainError, PreconditionError
from lebesgue_lab.kernel import KernelSpec, kernel_values
from lebesgue_lab.quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    asymptotic_comparison,
    ball_half,
    ball_integral,
    certify_bound,
    integrate_kernel_power,
    lp_norm,
    product_kernel_l1,
    norm_bound,
)


def simpson_oracle(l: int, p: float, n: int = 1_000_000) -> float:
    """Composite Simpson rule on n+1 uniform points of [0, 1/2], doubled."""
    xs = np.linspace(0.0, 0.5, n + 1)
    ys = kernel_values(l, xs) ** p
    h = 0.5 / n
    return 2.0 * (h / 3.0) * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum() + 2 * ys[2:-2:2].sum())


class TestLpNorm:
    @pytest.mark.parametrize("l", [2, 3, 5, 6, 10, 17, 64, 128])
    def test_parseval_identity(self, l):
        r = lp_norm(KernelSpec(l), 2.0, include_asymptotic=False)
        assert abs(r.value - 1.0 / l) <= 1e-9
        assert r.converged
        assert r.abs_error_estimate <= DEFAULT_CONFIG.abs_tol

    def test_fourth_power_against_simpson_oracle(self):
        r = lp_norm(KernelSpec(6), 4.0, include_asymptotic=False)
        assert abs(r.value - simpson_oracle(6, 4.0)) <= 1e-10
        assert 0.0 < r.value < math.sqrt(2.0 / (4.0 * 35.0))

    def test_monotone_decreasing_in_p(self):
        for l in (6, 11):
            values = [lp_norm(KernelSpec(l), p, include_asymptotic=False).value
                      for p in (1.0, 2.0, 3.0, 4.0, 8.0, 16.0)]
            assert all(a > b for a, b in zip(values, values[1:]))

    def test_bound_fields(self):
        assert lp_norm(KernelSpec(6), 2.0).bound == norm_bound(6, 2.0)
        assert lp_norm(KernelSpec(5), 2.0).bound is None
        assert lp_norm(KernelSpec(6), 1.5).bound is None
        assert lp_norm(KernelSpec(6), 2.0, include_asymptotic=False).asymptotic is None

    def test_rejects_p_below_one(self):
        with pytest.raises(DomainError):
            lp_norm(KernelSpec(6), 0.5)

    def test_deterministic_bit_for_bit(self):
        a = lp_norm(KernelSpec(23), 3.5)
        b = lp_norm(KernelSpec(23), 3.5)
        assert a.value == b.value
        assert a.abs_error_estimate == b.abs_error_estimate

    @pytest.mark.parametrize("l,p", [(6, 2.0), (9, 3.0), (9, 2.0)])
    def test_partition_invariance(self, l, p):
        spec = KernelSpec(l)
        default_val, _, _ = integrate_kernel_power(spec, p)
        cuts = np.linspace(0.0, 0.5, 4 * l + 1)
        uniform_val, _, ok = integrate_kernel_power(
            spec, p, pieces=list(zip(cuts[:-1], cuts[1:]))
        )
        assert ok
        assert abs(default_val - uniform_val) <= 1e-10

    def test_large_power_survives_underflow(self):
        r = lp_norm(KernelSpec(30), 120.0, include_asymptotic=False)
        assert r.converged and 0.0 < r.value < norm_bound(30, 120.0)

    def test_subdivision_budget_flags_nonconvergence(self):
        cfg = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=1)
        r = lp_norm(KernelSpec(6), 2.5, cfg, include_asymptotic=False)
        # budget of one split per arch cannot certify 1e-15; flag must be honest
        assert r.abs_error_estimate >= 0.0
        assert isinstance(r.converged, bool)


class TestCertifyBound:
    def test_parseval_case(self):
        cert = certify_bound(KernelSpec(6), 2.0)
        assert cert.bound == pytest.approx(math.sqrt(1.0 / 35.0), rel=1e-15)
        assert cert.value == pytest.approx(1.0 / 6.0, abs=1e-10)
        assert cert.margin == pytest.approx(0.0023641842790366, abs=1e-12)
        assert cert.passed

    def test_large_length(self):
        cert = certify_bound(KernelSpec(100), 2.0)
        assert cert.bound == pytest.approx(1.0 / math.sqrt(9999.0), rel=1e-15)
        assert cert.value == pytest.approx(0.01, abs=1e-10)
        assert cert.passed

    def test_length_below_six_rejected(self):
        with pytest.raises(PreconditionError):
            certify_bound(KernelSpec(5), 2.0)

    def test_exponent_below_two_rejected(self):
        with pytest.raises(PreconditionError):
            certify_bound(KernelSpec(8), 1.5)

    @pytest.mark.parametrize("l", [6, 12, 33, 64])
    @pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 16.0, 32.0])
    def test_bound_sits_below_asymptotic_envelope(self, l, p):
        # sqrt(2/(p(l^2-1))) < sqrt(2/p)/l * (1 + 1/(2(l^2-1)))
        lhs = norm_bound(l, p)
        rhs = math.sqrt(2.0 / p) / l * (1.0 + 1.0 / (2.0 * (l * l - 1)))
        assert lhs < rhs
        cert = certify_bound(KernelSpec(l), p)
        assert cert.value + cert.abs_error_estimate < lhs


def sinc_grid_oracle(p: float, span: float = 2000.0, n: int = 4_000_000):
    """Midpoint rule for the sinc power over [0, span], plus its envelope tail bound."""
    xs = (np.arange(n) + 0.5) * (span / n)
    vals = np.abs(np.sinc(xs)) ** p
    integral = 2.0 * float(vals.sum()) * (span / n)
    tail_bound = 2.0 / (math.pi**p * (p - 1.0) * span ** (p - 1.0))
    return integral, tail_bound


class TestBallIntegral:
    def test_value_at_two_is_one(self):
        assert abs(ball_integral(2.0) - 1.0) <= 1e-9

    def test_value_at_four_is_two_thirds(self):
        assert abs(ball_integral(4.0) - 2.0 / 3.0) <= 1e-9

    def test_against_fixed_grid_oracle(self):
        value, tail = sinc_grid_oracle(4.0)
        assert abs(ball_integral(4.0) - value) <= tail + 1e-9

    def test_grid_oracle_consistent_at_two(self):
        value, tail = sinc_grid_oracle(2.0)
        assert abs(ball_integral(2.0) - value) <= tail + 1e-9

    @pytest.mark.parametrize("p", [2.5, 3.0, 4.0, 8.0, 16.0])
    def test_strictly_below_bound(self, p):
        assert ball_integral(p) < math.sqrt(2.0 / p)

    def test_half_line_value_at_two(self):
        assert ball_half(2.0) == pytest.approx(math.pi / 2.0, abs=1e-12)

    def test_accepts_p_between_one_and_two(self):
        assert ball_integral(1.5) > 1.0  # wider than the p=2 case, no bound asserted

    def test_rejects_divergent_exponent(self):
        with pytest.raises(DomainError):
            ball_integral(1.0)

    def test_tail_policies_agree(self):
        fixed = QuadratureConfig(tail_cutoff_policy="fixed")
        driven = QuadratureConfig(tail_cutoff_policy="tol_driven")
        for p in (2.0, 3.0, 7.5):
            assert ball_integral(p, fixed) == pytest.approx(ball_integral(p, driven), abs=1e-11)


class TestAsymptoticComparison:
    def test_parseval_ratio_is_one(self):
        c = asymptotic_comparison(KernelSpec(1000), 2.0)
        assert c.ratio == pytest.approx(1.0, abs=1e-9)

    def test_fourth_power_deviation_shrinks(self):
        devs = [abs(asymptotic_comparison(KernelSpec(l), 4.0).ratio - 1.0)
                for l in (50, 100, 200, 400)]
        assert all(a > b for a, b in zip(devs, devs[1:]))

    def test_l1_ratio_band_and_trend(self):
        ratios = [asymptotic_comparison(KernelSpec(l), 1.0).ratio for l in (100, 400, 1000)]
        assert all(a > b for a, b in zip(ratios, ratios[1:]))
        assert 0.8 <= ratios[-1] <= 1.6


class TestProductKernel:
    def test_single_factor_matches_l1_norm(self):
        value, _, ok = product_kernel_l1([8])
        assert ok
        r = lp_norm(KernelSpec(8), 1.0, include_asymptotic=False)
        assert value == pytest.approx(r.value, abs=1e-11)

    def test_product_below_min_factor(self):
        value, _, ok = product_kernel_l1([6, 8])
        single, _, _ = product_kernel_l1([6])
        assert ok and 0.0 < value < single


class TestQuadratureConfig:
    def test_rejects_impossible_tolerance(self):
        with pytest.raises(DomainError):
            QuadratureConfig(abs_tol=1e-16)

    def test_rejects_budget_overflow(self):
        with pytest.raises(DomainError):
            QuadratureConfig(max_subdivisions=10**7)

    def test_rejects_unknown_policy(self):
        with pytest.raises(DomainError):
            QuadratureConfig(tail_cutoff_policy="everything")
