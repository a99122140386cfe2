import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracstrip import catalog
from fracstrip.domain import (Box, GridFunction, LipschitzProfile, SeminormParams, StripDomain,
                              dilate_vertical, flatten_shear, make_profile, restrict_profile)
from fracstrip.errors import (BoundViolation, DomainError, ParameterError, PreconditionError,
                              RegimeError)
from fracstrip.quadrature import QuadratureConfig, double_integral_singular
from fracstrip.seminorms import gagliardo


class TestParams:
    def test_trace_regime_flag(self):
        assert SeminormParams(2, 0.75, 2).trace_regime
        assert not SeminormParams(2, 0.4, 2).trace_regime

    @pytest.mark.parametrize("s,p", [(0.0, 2), (1.0, 2), (0.5, 1.0), (0.5, float("inf"))])
    def test_rejects_out_of_range(self, s, p):
        with pytest.raises(ParameterError):
            SeminormParams(2, s, p)

    def test_require_trace_regime(self):
        with pytest.raises(RegimeError):
            SeminormParams(2, 0.3, 2).require_trace_regime()


class TestProfiles:
    @pytest.mark.parametrize("name,kw", [("constant", {"value": 2.0}),
                                         ("sine", {"base": 1.0, "amplitude": 0.5}),
                                         ("abs_clamp", {"base": 1.0, "slope": 0.5})])
    def test_certification_within_bound(self, name, kw):
        prof = make_profile(name, **kw)
        report = prof.certify()
        assert report.max_ratio <= prof.lipschitz_bound + 1e-9
        assert report.min_value > 0

    def test_understated_lipschitz_bound_rejected(self):
        with pytest.raises(DomainError):
            LipschitzProfile(lambda x: 1 + np.sin(x[..., 0]), 0.5, 4.0)

    def test_nonpositive_profile_rejected(self):
        with pytest.raises(DomainError):
            LipschitzProfile(lambda x: np.sin(x[..., 0]), 1.0, 4.0)


class TestGridFunction:
    def test_csv_roundtrip(self, tmp_path):
        box = Box((-1.0, 0.0), (1.0, 1.0))
        grid = GridFunction.sample(catalog.get("bulk_bump"), box, (9, 5), "bulk")
        path = tmp_path / "g.csv"
        grid.to_csv(path)
        assert path.read_text().splitlines()[0].startswith("dims,spacing,origin")
        back = GridFunction.from_csv(path, domain_tag="bulk")
        np.testing.assert_allclose(back.values, grid.values, rtol=1e-15)
        assert back.dims == grid.dims

    def test_rejects_nonfinite(self):
        with pytest.raises(ParameterError):
            GridFunction((3,), (1.0,), (0.0,), np.array([0.0, np.nan, 1.0]), "boundary")

    def test_interpolates_linear_exactly(self):
        box = Box((0.0,), (1.0,))
        grid = GridFunction.sample(lambda x: 3 * x[..., 0] + 1, box, (11,))
        xs = np.linspace(0, 1, 37)[:, None]
        np.testing.assert_allclose(grid(xs), 3 * xs[:, 0] + 1, atol=1e-12)


class TestTransforms:
    def test_dilation_law_one_dimensional(self):
        params = SeminormParams(1, 0.75, 2)
        box = Box((0.0,), (1.0,))
        base = gagliardo(lambda x: x[..., 0], params, box).value_p
        for alpha in (0.5, 2.0):
            # u(alpha x) on (0, 1/alpha)
            scaled = gagliardo(lambda x, a=alpha: a * x[..., 0], params,
                               Box((0.0,), (1 / alpha,))).value_p
            assert scaled == pytest.approx(alpha ** (params.sp - 1) * base, rel=1e-2)

    def test_dilation_roundtrip_is_identity(self):
        dom = StripDomain.flat(1.0, half_width=2.0)
        u = catalog.get("bulk_wave")
        v, dom2 = dilate_vertical(u, dom, 2.0)
        w, dom3 = dilate_vertical(v, dom2, 0.5)
        pts = np.random.default_rng(1).uniform([-2, 0], [2, 1], (50, 2))
        np.testing.assert_allclose(w(pts), u(pts), rtol=1e-14)
        assert dom3.b == pytest.approx(1.0)

    def test_dilation_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            dilate_vertical(catalog.get("bulk_xn"), StripDomain.flat(1.0), 0.0)

    def test_constant_shear_preserves_seminorm(self):
        params = SeminormParams(2, 0.6, 2)
        box = Box.centered(1, 2.0)
        u = catalog.get("bulk_bump", center=0.8)
        res = flatten_shear(u, lambda x: np.full(x.shape[:-1], 0.3),
                            lambda x: np.full(x.shape[:-1], 1.3), box)
        flat = StripDomain.flat(1.0, box=box)
        orig = gagliardo(lambda p: u(p + np.array([0.0, 0.3])), params, flat).value_p
        sheared = gagliardo(res.function, params, flat).value_p
        assert sheared == pytest.approx(orig, rel=1e-10)

    def test_shear_comparison_bound(self):
        params = SeminormParams(2, 0.6, 2)
        box = Box.centered(1, 2.0)
        u = catalog.get("bulk_bump", center=0.5)
        lower = make_profile("linear", half_width=2.0, slope=0.5)
        upper = lambda x: 0.5 * x[..., 0] + 1.0
        res = flatten_shear(u, lower, upper, box, lipschitz=0.5, params=params)
        bound = res.comparison_bound
        assert bound == pytest.approx(2.5 ** (2 + 1.2))
        v_val = gagliardo(res.function, params, res.domain).value_p
        # the original region between the two slanted graphs
        region = Box((-2.0, -1.0), (2.0, 2.0))
        inside = lambda pts: (pts[..., 1] > 0.5 * pts[..., 0]) & (pts[..., 1] < 0.5 * pts[..., 0] + 1)
        u_val = double_integral_singular(u, region, params.p, params.N + params.sp,
                                         QuadratureConfig(cells_per_axis=24),
                                         inside=inside).value
        assert 1 / bound <= v_val / u_val <= bound


class TestDecreaser:
    def test_constant_gives_zeros(self):
        params = SeminormParams(2, 0.75, 2)
        rep = restrict_profile(catalog.get("constant"), 1.0, 0.5, params, Box.centered(1, 4))
        assert rep.as_tuple() == (0.0, 0.0, 0.0)

    def test_equal_screens_give_equal_far_values(self):
        params = SeminormParams(2, 0.75, 2)
        g = catalog.get("gaussian")
        rep = restrict_profile(g, 1.0, 1.0, params, Box.centered(1, 4))
        assert rep.far_small_screen == pytest.approx(rep.far_large_screen_plus_close
                                                     - rep.close_large_screen, rel=1e-12)

    def test_gaussian_constant_screens(self):
        params = SeminormParams(2, 0.75, 2)
        rep = restrict_profile(catalog.get("gaussian"), 1.0, 0.5, params, Box.centered(1, 4))
        assert rep.holds

    def test_reversed_screens_rejected(self):
        with pytest.raises(PreconditionError):
            restrict_profile(catalog.get("gaussian"), 0.5, 1.0, SeminormParams(2, 0.75, 2),
                             Box.centered(1, 4))

    @given(st.floats(0.2, 1.0), st.floats(0.3, 0.95), st.sampled_from(catalog.BOUNDARY_SMOOTH))
    def test_holds_for_random_screens(self, big, fraction, name):
        params = SeminormParams(2, 0.75, 2)
        restrict_profile(catalog.get(name), big, big * fraction, params, Box.centered(1, 4))


def test_bound_violation_carries_offending():
    err = BoundViolation("x", [1, 2])
    assert err.offending == [1, 2]
