import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracstrip.domain import Box
from fracstrip.errors import (BoundViolation, ConvergenceWarning, DivergentIntegralError,
                              ParameterError, PreconditionError)
from fracstrip.quadrature import (QuadratureConfig, double_integral_singular,
                                  LagRule, estimate_from_levels, finite_kernel_constants,
                                  lag_integral,
                                  pairwise_sum, slicing_finite_kernel, slicing_plane_kernel)


def unit_interval_oracle(s):
    return 2 / ((2 - 2 * s) * (3 - 2 * s))


class TestDoubleIntegral:
    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_identity_on_unit_interval(self, s):
        est = double_integral_singular(lambda x: x[..., 0], Box((0.0,), (1.0,)), 2, 1 + 2 * s)
        assert est.value == pytest.approx(unit_interval_oracle(s), rel=1e-2)

    def test_exclude_only_policy_is_less_accurate(self):
        box = Box((0.0,), (1.0,))
        oracle = unit_interval_oracle(0.75)
        corrected = double_integral_singular(lambda x: x[..., 0], box, 2, 2.5).value
        bare = double_integral_singular(lambda x: x[..., 0], box, 2, 2.5,
                                        QuadratureConfig(diagonal_policy="exclude-only")).value
        assert abs(corrected - oracle) < abs(bare - oracle)

    def test_two_dimensional_separable(self):
        # u = x_2 on the unit square: integral over a product box
        est = double_integral_singular(lambda x: x[..., 1], Box((0.0, 0.0), (1.0, 1.0)), 2, 3.0)
        assert est.value > 0 and est.relative_delta < 0.05

    def test_divergent_exponent_rejected(self):
        with pytest.raises(DivergentIntegralError):
            double_integral_singular(lambda x: x[..., 0], Box((0.0,), (1.0,)), 2, 3.0)

    def test_bad_config(self):
        with pytest.raises(ParameterError):
            QuadratureConfig(cells_per_axis=4)
        with pytest.raises(ParameterError):
            QuadratureConfig(refinement_levels=0)

    def test_refinement_warning(self):
        with pytest.warns(ConvergenceWarning):
            estimate_from_levels([1.0, 2.0])

    @given(st.floats(-3, 3).filter(lambda c: abs(c) > 1e-3), st.floats(0.3, 0.8))
    def test_homogeneity(self, c, s):
        box = Box((0.0,), (1.0,))
        base = double_integral_singular(lambda x: np.sin(3 * x[..., 0]), box, 2, 1 + 2 * s)
        scaled = double_integral_singular(lambda x: c * np.sin(3 * x[..., 0]), box, 2, 1 + 2 * s)
        assert scaled.value == pytest.approx(c * c * base.value, rel=1e-10)


class TestPairwiseSum:
    def test_matches_fsum(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(100_001) * 1e8
        assert pairwise_sum(v) == pytest.approx(math.fsum(v), rel=1e-12, abs=1e-3)

    def test_deterministic_under_repeat(self):
        v = np.random.default_rng(3).standard_normal(4097)
        assert pairwise_sum(v) == pairwise_sum(v.copy())


class TestLagIntegral:
    def test_indicator_close_closed_form(self):
        g = lambda x: (x >= 0).astype(float)
        # every pair closer than 1 that straddles 0 lies inside [-8, 8]
        val = lag_integral(g, -8.0, 8.0, 2, 1.5, region="near", screen=1.0, breakpoints=(0.0,))
        assert float(val) == pytest.approx(4.0, rel=1e-3)

    def test_refined_rule_agrees(self):
        g = lambda x: np.exp(-x * x)
        coarse = lag_integral(g, -6.0, 6.0, 2, 2.0)
        fine = lag_integral(g, -6.0, 6.0, 2, 2.0, rule=LagRule().refined())
        assert float(fine) == pytest.approx(float(coarse), rel=1e-6)


class TestPlaneKernel:
    @pytest.mark.parametrize("rho", [0.1, 1.0, 10.0])
    def test_lambda_two(self, rho):
        assert slicing_plane_kernel(2.0, rho, 2) == pytest.approx(math.pi / rho, rel=1e-2)

    def test_lambda_four(self):
        assert slicing_plane_kernel(4.0, 1.0, 2) == pytest.approx(math.pi / 2, rel=1e-2)

    @given(st.floats(1.5, 5.0), st.floats(0.05, 20.0))
    def test_scaling_law(self, lam, rho):
        ratio = slicing_plane_kernel(lam, 2 * rho, 2) / slicing_plane_kernel(lam, rho, 2)
        assert ratio == pytest.approx(2 ** (-(lam - 1)), rel=1e-2)

    def test_three_dimensional_value(self):
        # int_{R^2} (r^2 + 1)^(-3/2) dx = 2 pi
        assert slicing_plane_kernel(3.0, 1.0, 3) == pytest.approx(2 * math.pi, rel=1e-2)

    def test_divergent(self):
        with pytest.raises(DivergentIntegralError):
            slicing_plane_kernel(1.0, 1.0, 2)
        with pytest.raises(PreconditionError):
            slicing_plane_kernel(2.0, 0.0, 2)


class TestFiniteKernel:
    def test_arctan_value(self):
        val = slicing_finite_kernel(2.0, 0.1, 1.0, 0.5, 1.0)
        assert val == pytest.approx(2 * math.atan(5) / 0.1, rel=1e-2)

    def test_lambda_two_constant_is_pi(self):
        assert finite_kernel_constants(2.0, 1.0)[1] == pytest.approx(math.pi)

    def test_limit_approaches_plane_value(self):
        vals = [slicing_finite_kernel(2.0, 1.0, r, r / 2, 1.0) for r in (10, 100, 1000)]
        assert vals[0] < vals[1] < vals[2] < math.pi
        assert vals[2] == pytest.approx(math.pi, rel=1e-2)

    @given(st.floats(1.2, 4.0), st.floats(0.01, 1.0), st.floats(0.01, 0.99))
    def test_bounds_hold(self, lam, rho, frac):
        slicing_finite_kernel(lam, rho, 1.0, frac, 1.0)

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            slicing_finite_kernel(2.0, 0.1, 1.0, 1.5, 1.0)
        with pytest.raises(ParameterError):
            slicing_finite_kernel(1.0, 0.1, 1.0, 0.5, 1.0)


class TestRuleProperties:
    def test_exclude_only_monotone_in_refinement(self):
        cfg = QuadratureConfig(cells_per_axis=8, refinement_levels=3,
                               diagonal_policy="exclude-only")
        est = double_integral_singular(lambda x: np.sin(2 * x[..., 0]), Box((0.0,), (1.0,)), 2,
                                       2.2, cfg)
        assert list(est.levels) == sorted(est.levels)

    def test_bit_identical_across_chunking(self):
        box = Box((0.0, 0.0), (1.0, 1.0))
        u = lambda x: np.exp(-x[..., 0] ** 2) * x[..., 1]
        values = {double_integral_singular(u, box, 2, 3.2,
                                           QuadratureConfig(parallel_chunk=c)).value
                  for c in (1, 7, 128, 4096)}
        assert len(values) == 1
