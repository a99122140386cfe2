import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from fracstrip import catalog
from fracstrip.domain import Box, SeminormParams, StripDomain, make_profile
from fracstrip.errors import DomainError, EquivalenceViolation, RegimeError
from fracstrip.seminorms import (close_screened, difference_trace, equivalence_check_flat,
                                 far_screened, gagliardo, slice_horizontal_far,
                                 slice_horizontal_near, slice_vertical, weighted_lp_trace)

P075 = SeminormParams(2, 0.75, 2)
BOX = Box.centered(1, 8.0)


class TestClosedForms:
    @pytest.mark.parametrize("s,expected", [(0.25, 2 / (1.5 * 2.5)), (0.5, 1.0)])
    def test_identity_on_unit_interval(self, s, expected):
        rep = gagliardo(lambda x: x[..., 0], SeminormParams(1, s, 2), Box((0.0,), (1.0,)))
        assert rep.value_p == pytest.approx(expected, rel=1e-2)

    def test_indicator_close(self):
        rep = close_screened(catalog.get("heaviside"), 1.0, P075)
        assert rep.value_p == pytest.approx(4.0, rel=2e-2)

    def test_indicator_far(self):
        # the jump's far tail decays like R^(-sp), so truncate wider
        rep = far_screened(catalog.get("heaviside"), 1.0, P075, Box.centered(1, 32.0))
        assert rep.value_p == pytest.approx(4 / 3, rel=2e-2)

    def test_report_json(self):
        data = close_screened(catalog.get("gaussian"), 1.0, P075).to_json()
        assert data["kind"] == "close_screened" and data["value_p"] > 0
        assert data["seminorm"] == pytest.approx(data["value_p"] ** 0.5)


class TestSlices:
    def test_vertical_identity(self):
        dom = StripDomain.flat(1.0, half_width=4.0)
        rep = slice_vertical(catalog.get("bulk_xn"), SeminormParams(2, 0.5, 2), dom)
        assert rep.value_p == pytest.approx(8.0, rel=2e-2)

    def test_horizontal_near_of_lateral_function(self):
        dom = StripDomain.flat(1.0, half_width=4.0)
        g = catalog.get("gaussian")
        u = lambda pts: g(pts[..., :-1])
        near = slice_horizontal_near(u, P075, dom).value_p
        oracle = close_screened(g, 1.0, P075, Box.centered(1, 4.0), exponent=1 + P075.sp)
        assert near == pytest.approx(oracle.value_p, rel=2e-2)

    def test_horizontal_far_of_lateral_function(self):
        b = 0.5
        dom = StripDomain.flat(b, half_width=4.0)
        g = catalog.get("gaussian")
        u = lambda pts: g(pts[..., :-1])
        far = slice_horizontal_far(u, P075, dom).value_p
        oracle = far_screened(g, b, P075, Box.centered(1, 4.0), weighted=False)
        assert far == pytest.approx(b * oracle.value_p, rel=2e-2)

    def test_far_slice_rejects_graph(self):
        dom = StripDomain.graph(make_profile("sine"))
        with pytest.raises(DomainError):
            slice_horizontal_far(catalog.get("bulk_bump"), P075, dom)


class TestTraceFunctionals:
    def test_difference_trace_graph(self):
        g = catalog.get("gaussian")
        zero = lambda x: np.zeros(np.shape(x)[:-1])
        dom = StripDomain.graph(make_profile("constant", value=2.0))
        rep = difference_trace(P075, dom, f_plus=g, f_minus=zero)
        assert rep.value_p == pytest.approx(2 ** (1 - 1.5) * math.sqrt(math.pi / 2), rel=1e-6)

    def test_difference_trace_regime(self):
        with pytest.raises(RegimeError):
            difference_trace(SeminormParams(2, 0.4, 2), StripDomain.flat(1.0),
                             u=catalog.get("bulk_bump"))

    def test_weighted_lp_trace(self):
        g = catalog.get("gaussian")
        prof = lambda x: np.abs(x[..., 0]) + 0.1
        value = weighted_lp_trace(g, 1.0, prof, 2.0, BOX)
        oracle = integrate.quad(lambda x: math.exp(-2 * x * x) * min(1.0, abs(x) + 0.1),
                                -8, 8, points=[-0.9, 0, 0.9], limit=200)[0]
        assert value == pytest.approx(oracle, rel=1e-4)


class TestInvariants:
    @given(st.floats(-4, 4).filter(lambda c: abs(c) > 1e-2),
           st.sampled_from(catalog.BOUNDARY_SMOOTH))
    def test_homogeneity(self, c, name):
        g = catalog.get(name)
        base = far_screened(g, 1.0, P075).value_p
        scaled = far_screened(g.scaled(c), 1.0, P075).value_p
        assert scaled == pytest.approx(abs(c) ** 2 * base, rel=1e-8)

    @given(st.floats(-2, 2), st.sampled_from(("gaussian", "bump", "heaviside")))
    def test_translation_invariance(self, shift, name):
        g = catalog.get(name)
        base = close_screened(g, 1.0, P075).value_p
        moved = close_screened(g.shifted(shift), 1.0, P075).value_p
        assert moved == pytest.approx(base, rel=5e-3)

    @given(st.floats(0.2, 2.0), st.floats(1.05, 2.0), st.sampled_from(catalog.BOUNDARY_SMOOTH))
    def test_close_screen_monotone(self, screen, factor, name):
        g = catalog.get(name)
        small = close_screened(g, screen, P075).value_p
        large = close_screened(g, screen * factor, P075).value_p
        assert small <= large * (1 + 1e-6)


def test_flat_equivalence_gaussian_bump():
    dom = StripDomain.flat(1.0, half_width=4.0)
    rep = equivalence_check_flat(catalog.get("bulk_bump"), SeminormParams(2, 0.6, 2), dom)
    assert 1 / 50 <= rep.upper_ratio <= 50 and 1 / 50 <= rep.lower_ratio <= 50
    assert rep.drift < 0.1


def test_equivalence_detects_one_sided_zero():
    dom = StripDomain.flat(1.0, half_width=2.0)
    # the slices see nothing of a function that only lives outside the box laterally
    with pytest.raises(EquivalenceViolation):
        from fracstrip.seminorms import _check_zero_consistency
        _check_zero_consistency(0.0, 1.0, 1.0)


@pytest.mark.parametrize("name", catalog.BOUNDARY_SMOOTH)
def test_gagliardo_dominates_close_with_matched_exponent(name):
    g = catalog.get(name)
    full = gagliardo(g, P075, BOX).value_p
    close = close_screened(g, 1.0, P075, BOX, exponent=1 + P075.sp).value_p
    assert close <= full * (1 + 1e-6)
