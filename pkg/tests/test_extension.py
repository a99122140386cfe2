import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracstrip import catalog
from fracstrip.domain import Box, SeminormParams, StripDomain, make_profile
from fracstrip.errors import BoundViolation, DomainError, RegimeError
from fracstrip.extension import (Cutoff, Mollifier, cutoff_one_side, extend_flat, extend_general,
                                 extend_two_sided_flat, hardy_constant, lateral_bound_check,
                                 two_sided_hypotheses, vertical_bound_check, weighted_hypothesis)
from fracstrip.seminorms import close_screened, far_screened, gagliardo

P = SeminormParams(2, 0.75, 2)
XS = np.linspace(-3, 3, 241)


def layer(u, height):
    return u(np.stack([XS, np.full_like(XS, height)], -1))


def sup_error(u, g, height):
    return float(np.max(np.abs(layer(u, height) - g(XS[:, None]))))


class TestMollifier:
    def test_unit_mass(self):
        assert Mollifier().mass() == pytest.approx(1.0, abs=1e-10)
        assert Mollifier(2).mass() == pytest.approx(1.0, abs=1e-8)

    def test_discrete_rule_is_even_and_normalized(self):
        nodes, weights = Mollifier().rule
        assert weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert float(nodes[:, 0] @ weights) == pytest.approx(0.0, abs=1e-15)

    def test_cutoff_endpoints(self):
        c = Cutoff()
        assert c(0.0) == 1.0 and c(1.0) == 0.0 and c(2.0) == 0.0
        t = np.linspace(0, 1, 10001)
        assert np.max(np.abs(c.derivative(t))) <= c.derivative_bound


class TestFlatExtension:
    @given(st.floats(-3, 3), st.floats(-2, 2), st.floats(0.01, 1.0))
    def test_affine_reproduced(self, slope, offset, height):
        g = lambda x: slope * x[..., 0] + offset
        u = extend_flat(g, 1.0)
        np.testing.assert_allclose(layer(u, height), g(XS[:, None]), atol=1e-12)

    def test_gaussian_trace_second_order(self):
        g = catalog.get("gaussian")
        u = extend_flat(g, 1.0)
        errs = [sup_error(u, g, d) for d in (0.1, 0.05, 0.025)]
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders > 1.8)

    def test_regime_enforced(self):
        with pytest.raises(RegimeError):
            extend_flat(catalog.get("gaussian"), 1.0, params=SeminormParams(2, 0.4, 2))

    def test_outside_box_flag(self):
        u = extend_flat(catalog.get("gaussian"), 1.0, box=Box.centered(1, 1.0))
        layer(u, 0.5)
        assert u.flags["outside_box"]


class TestGeneralExtension:
    def test_rejects_steep_profile(self):
        steep = make_profile("sine", amplitude=1.0, frequency=2.0)
        with pytest.raises(DomainError):
            extend_general(catalog.get("gaussian"), steep)

    def test_bound_against_half_screens(self):
        prof = make_profile("abs_clamp", base=1.0, slope=0.5)
        g = catalog.get("gaussian")
        u = extend_general(g, prof, params=P)
        G = gagliardo(u, P, StripDomain.graph(prof)).value_p
        half = lambda x: 0.5 * prof(x)
        rhs = close_screened(g, half, P).value_p + far_screened(g, half, P).value_p
        assert 0 < G <= 12 * rhs


class TestCutoff:
    def test_top_trace_vanishes_and_bottom_kept(self):
        prof = make_profile("constant", value=1.0)
        g = catalog.get("bump")
        u = cutoff_one_side(extend_general(g, prof), prof, g=g, params=P)
        assert np.max(np.abs(layer(u, 1.0))) == 0.0
        assert sup_error(u, g, 1e-4) < 1e-6
        assert not u.flags["weighted_hypothesis_divergent"]

    def test_weighted_hypothesis_flags_growth(self):
        prof = make_profile("constant", value=1.0, half_width=8.0)
        grow = lambda x: np.ones(x.shape[:-1])
        hyp = weighted_hypothesis(grow, prof, P, Box.centered(1, 8.0))
        assert hyp.divergent
        hyp = weighted_hypothesis(catalog.get("bump"), prof, P, Box.centered(1, 8.0))
        assert not hyp.divergent


class TestTwoSided:
    def test_traces(self):
        f_plus, zero = catalog.get("bump"), catalog.get("constant", c=0.0)
        u = extend_two_sided_flat(f_plus, zero, 1.0)
        assert np.max(np.abs(layer(u, 0.0))) < 1e-14
        errs = [sup_error(u, f_plus, 1.0 - d) for d in (0.1, 0.05, 0.025, 0.0125)]
        assert errs[-1] < errs[0] and errs[-1] < 1e-2

    @given(st.sampled_from(catalog.BOUNDARY_SMOOTH), st.sampled_from(catalog.BOUNDARY_SMOOTH),
           st.floats(0.5, 2.0))
    def test_exact_traces_at_both_ends(self, top, bottom, b):
        f_plus, f_minus = catalog.get(top), catalog.get(bottom)
        u = extend_two_sided_flat(f_plus, f_minus, b)
        # at x_N = b the mollifier radius of u_h is zero and the cutoff is one
        assert sup_error(u, f_plus, b) < 1e-12
        assert sup_error(u, f_minus, 0.0) < 1e-12

    def test_hypothesis_sum_is_positive(self):
        hyp = two_sided_hypotheses(catalog.get("gaussian"), catalog.get("bump"), 1.0, P,
                                   Box.centered(1, 8.0))
        assert hyp.total > 0 and not hyp.divergent


class TestInequalities:
    def test_lateral_random_samples(self):
        g = catalog.get("gaussian")
        u = extend_flat(g, 1.0)
        rng = np.random.default_rng(7)
        pts = np.column_stack([rng.uniform(-3, 3, 100), rng.uniform(-1, 1, 100),
                               rng.uniform(0.05, 1, 100)])
        assert lateral_bound_check(u, g, pts, P).passes

    def test_lateral_violation_reported(self):
        g = catalog.get("gaussian")
        u = extend_flat(g, 1.0)
        with pytest.raises(BoundViolation) as info:
            lateral_bound_check(u, g, [[0.3, 0.2, 0.5]], P, budget=1e-6)
        assert info.value.offending == [0]

    def test_vertical_identity_closed_form(self):
        params = SeminormParams(2, 0.5, 2)
        rep = vertical_bound_check(lambda y: y, 1.0, params, derivative=np.ones_like)
        assert float(rep.lhs) == pytest.approx(1.0, rel=1e-6)
        assert float(rep.rhs) == pytest.approx(2.0, rel=1e-10)

    def test_vertical_sine(self):
        assert vertical_bound_check(np.sin, 1.0, P, derivative=np.cos).passes

    def test_hardy_constant(self):
        assert hardy_constant(SeminormParams(2, 0.5, 2)) == pytest.approx(4.0)


@given(st.floats(-3, 3), st.sampled_from(catalog.BOUNDARY_SMOOTH),
       st.sampled_from(catalog.BOUNDARY_SMOOTH))
def test_linearity(a, first, second):
    g1, g2 = catalog.get(first), catalog.get(second)
    combo = lambda x: a * g1(x) + g2(x)
    u, u1, u2 = (extend_flat(f, 1.0) for f in (combo, g1, g2))
    pts = np.stack(np.meshgrid(np.linspace(-3, 3, 25), np.linspace(0, 1, 9)), -1).reshape(-1, 2)
    np.testing.assert_allclose(u(pts), a * u1(pts) + u2(pts), atol=1e-12)


@pytest.mark.parametrize("name", catalog.BOUNDARY_SMOOTH)
def test_trace_order_at_least_one(name):
    g = catalog.get(name)
    u = extend_flat(g, 1.0)
    deltas = np.array([0.1, 0.05, 0.025, 0.0125])
    errs = [sup_error(u, g, d) for d in deltas]
    order = np.polyfit(np.log(deltas), np.log(errs), 1)[0]
    assert order >= 1.0
