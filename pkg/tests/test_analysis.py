import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracstrip import catalog
from fracstrip.analysis import (DEFAULT_RADII, POWERLAW_RADII, closed_form_indicator,
                                containment_demo, divergence_exponent, truncated_seminorm)
from fracstrip.domain import SeminormParams
from fracstrip.errors import ParameterError, RegimeError

CHI = catalog.get("heaviside")
P075 = SeminormParams(2, 0.75, 2)


class TestClosedForms:
    def test_values(self):
        assert closed_form_indicator(0.75, 2, "close_screened") == pytest.approx(4.0)
        assert closed_form_indicator(0.75, 2, "far_screened") == pytest.approx(4 / 3)

    @given(st.floats(0.51, 0.99), st.floats(0.5, 100))
    def test_power_law(self, s, radius):
        r1 = closed_form_indicator(s, 2, "unscreened_truncated", radius)
        r2 = closed_form_indicator(s, 2, "unscreened_truncated", 2 * radius)
        assert r1 / r2 == pytest.approx(2 ** (-(2 - 2 * s)), rel=1e-12)

    def test_regime_and_arguments(self):
        with pytest.raises(RegimeError):
            closed_form_indicator(0.3, 2, "close_screened")
        with pytest.raises(ParameterError):
            closed_form_indicator(0.75, 2, "unscreened_truncated")
        with pytest.raises(ParameterError):
            closed_form_indicator(0.75, 2, "bogus")

    def test_truncated_matches_square_box_closed_form(self):
        # both points in [-R, R]: 2 int_0^R int_0^R (a + b)^-sp = the line below
        sp = P075.sp
        for radius in (4.0, 16.0):
            num = truncated_seminorm(CHI, "unscreened", P075, radius)
            exact = 2 * (2 - 2 ** (2 - sp)) / ((sp - 1) * (2 - sp)) * radius ** (2 - sp)
            assert num == pytest.approx(exact, rel=2e-2)


class TestDivergenceExponent:
    def test_indicator_unscreened_slope(self):
        fit = divergence_exponent(CHI, "unscreened", P075)
        assert fit.slope == pytest.approx(0.5, abs=0.1) and fit.divergent

    def test_indicator_close_is_flat(self):
        fit = divergence_exponent(CHI, "close", P075)
        assert not fit.divergent
        assert fit.values[-1] == pytest.approx(4.0, rel=1e-2)

    def test_powerlaw_far_slope(self):
        params = SeminormParams(2, 0.4, 4)
        fit = divergence_exponent(catalog.get("powerlaw_clamp", lam=0.5), "far", params,
                                  POWERLAW_RADII)
        assert fit.slope == pytest.approx(0.4, abs=0.1) and fit.divergent

    def test_radii_validation(self):
        with pytest.raises(ParameterError):
            divergence_exponent(CHI, "close", P075, (1, 2, 4))
        with pytest.raises(ParameterError):
            divergence_exponent(CHI, "close", P075, (1, 2, 3, 4))

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            truncated_seminorm(CHI, "sideways", P075, 4.0)


class TestContainment:
    def test_indicator_verdicts(self):
        rep = containment_demo(0.75, 2)
        assert rep.indicator == {"unscreened": "divergent", "close": "finite", "far": "finite"}
        assert len(rep.lines()) == 2

    def test_powerlaw_verdicts(self):
        rep = containment_demo(0.4, 4, lam=0.5)
        assert rep.powerlaw == {"close": "finite", "far": "divergent"}
        assert rep.fits["powerlaw_far"].slope == pytest.approx(0.4, abs=0.1)
        assert "powerlaw_clamp" in rep.to_json()

    def test_no_regime(self):
        with pytest.raises(RegimeError):
            containment_demo(0.3, 2)

    def test_bad_lambda(self):
        with pytest.raises(RegimeError):
            containment_demo(0.4, 4, lam=0.9)
