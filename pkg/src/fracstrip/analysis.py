"""Strict containments between the unscreened, intersected and close-screened spaces.

Two witnesses are used on the line: the indicator of ``[0, inf)``, which has
finite close and far screened seminorms but an infinite unscreened one once
``1 < sp < 2``, and ``max(1, x^lam)``, whose close seminorm is finite while
the far seminorm grows like ``R^(lam p - sp)`` on ``[-R, R]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import catalog
from .domain import Box, SeminormParams
from .errors import ContainmentViolation, FitError, ParameterError, RegimeError
from .seminorms import screened_integral

QUANTITIES = ("unscreened_truncated", "close_screened", "far_screened")
KINDS = ("unscreened", "close", "far")
DEFAULT_RADII = (8.0, 16.0, 32.0, 64.0, 128.0)
# (x^lam - 1)^p carries corrections of relative size x^(-1/2), so the
# leading power only dominates the fit at large radii
POWERLAW_RADII = tuple(2.0 ** k for k in range(12, 17))
SLOPE_THRESHOLD = 0.05
RESIDUAL_THRESHOLD = 0.02


def _indicator_regime(s: float, p: float) -> float:
    sp = s * p
    if not 1 < sp < 2:
        raise RegimeError(f"the indicator example needs 1 < sp < 2, got sp={sp:g}")
    return sp


def closed_form_indicator(s: float, p: float, quantity: str, radius: float | None = None) -> float:
    """Closed-form seminorms of the indicator of ``[0, inf)`` with screen 1.

    ``unscreened_truncated`` only counts pairs straddling 0 with ``|x| < radius``
    and ``y > 0``; it grows like ``radius^(2 - sp)``.
    """
    sp = _indicator_regime(s, p)
    if quantity == "close_screened":
        return (2 / (sp - 1)) * (1 / (2 - sp) - 1)
    if quantity == "far_screened":
        return (2 / (1 + sp)) * (1 + 1 / sp)
    if quantity == "unscreened_truncated":
        if radius is None or radius <= 0:
            raise ParameterError("unscreened_truncated needs a positive radius")
        return 2 / ((sp - 1) * (2 - sp)) * radius ** (2 - sp)
    raise ParameterError(f"unknown quantity '{quantity}'; expected one of {QUANTITIES}")


def truncated_seminorm(g: Callable, kind: str, params: SeminormParams, radius: float,
                       screen: float = 1.0) -> float:
    """Seminorm of ``g`` restricted to ``[-radius, radius]`` (no tail added).

    ``unscreened`` uses kernel exponent ``sp`` (order ``s - 1/p`` on the
    line), ``close`` the same exponent below ``screen`` and ``far`` exponent
    ``2 + sp`` above it with the weight ``screen^2``.
    """
    box = Box.centered(1, radius)
    sp = params.sp
    if kind == "unscreened":
        est = screened_integral(g, box, params.p, sp, region="all", label="unscreened")
    elif kind == "close":
        est = screened_integral(g, box, params.p, sp, region="near", screen=screen,
                                label="close")
    elif kind == "far":
        est = screened_integral(g, box, params.p, 2 + sp, region="far", screen=screen,
                                weighted=True, label="far")
    else:
        raise ParameterError(f"unknown seminorm kind '{kind}'; expected one of {KINDS}")
    return est.value


@dataclass(frozen=True)
class DivergenceFit:
    kind: str
    radii: tuple
    values: tuple
    slope: float
    residual: float

    @property
    def divergent(self) -> bool:
        return self.slope > SLOPE_THRESHOLD and self.residual < RESIDUAL_THRESHOLD

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.radii, self.values))

    def to_json(self) -> dict:
        return {"kind": self.kind, "radii": list(self.radii), "values": list(self.values),
                "slope": self.slope, "residual": self.residual,
                "verdict": "divergent" if self.divergent else "finite"}


def divergence_exponent(g: Callable, kind: str, params: SeminormParams,
                        radii: Sequence[float] = DEFAULT_RADII,
                        screen: float = 1.0) -> DivergenceFit:
    """Log-log slope of the truncated seminorm against the truncation radius."""
    radii = tuple(float(r) for r in radii)
    if len(radii) < 4:
        raise ParameterError("need at least four truncation radii")
    ratios = np.array(radii[1:]) / np.array(radii[:-1])
    if np.any(ratios <= 1) or not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise ParameterError("truncation radii must form an increasing geometric progression")
    values = tuple(truncated_seminorm(g, kind, params, r, screen) for r in radii)
    if np.any(np.diff(values) < -1e-12 * max(abs(v) for v in values)) or min(values) <= 0:
        raise FitError(f"truncated values are not increasing and positive: {values}")
    lr, lv = np.log(radii), np.log(values)
    coef, res, *_ = np.polyfit(lr, lv, 1, full=True)
    residual = math.sqrt(float(res[0]) / len(radii)) if len(res) else 0.0
    return DivergenceFit(kind, radii, values, float(coef[0]), residual)


@dataclass
class ContainmentReport:
    s: float
    p: float
    lam: float | None
    indicator: dict = field(default_factory=dict)
    powerlaw: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    closed_forms: dict = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = []
        if self.indicator:
            v = self.indicator
            out.append(f"indicator: unscreened {v['unscreened']}, close {v['close']}, "
                       f"far {v['far']}")
        if self.powerlaw:
            v = self.powerlaw
            out.append(f"max(1, x^{self.lam:g}): close {v['close']}, far {v['far']}")
        out.append("chain consistent: unscreened < screened intersection < close screened")
        return out

    def to_json(self) -> dict:
        return {"s": self.s, "p": self.p, "lam": self.lam, "indicator": self.indicator,
                "powerlaw_clamp": self.powerlaw,
                "fits": {k: f.to_json() for k, f in self.fits.items()},
                "closed_forms": self.closed_forms, "lines": self.lines()}


def _verdict(fit: DivergenceFit) -> str:
    return "divergent" if fit.divergent else "finite"


def containment_demo(s: float, p: float, lam: float | None = None,
                     radii: Sequence[float] = DEFAULT_RADII,
                     powerlaw_radii: Sequence[float] = POWERLAW_RADII) -> ContainmentReport:
    """Run both witnesses and check the verdicts separate the three spaces.

    The indicator runs when ``1 < sp < 2``; ``max(1, x^lam)`` runs when
    ``lam`` is given and ``1/p < s < lam < 1 - 1/p``.
    """
    params = SeminormParams(2, s, p)
    sp = params.sp
    run_indicator = 1 < sp < 2
    if lam is not None and not 1 / p < s < lam < 1 - 1 / p:
        raise RegimeError(f"max(1, x^lam) needs 1/p < s < lam < 1 - 1/p; got s={s}, lam={lam}")
    if not run_indicator and lam is None:
        raise RegimeError(f"no witness applies: 1 < sp < 2 fails (sp={sp:g}) and no lam given")
    report = ContainmentReport(s, p, lam)
    if run_indicator:
        chi = catalog.get("heaviside")
        for kind in KINDS:
            fit = divergence_exponent(chi, kind, params, radii)
            report.fits[f"indicator_{kind}"] = fit
            report.indicator[kind] = _verdict(fit)
        report.closed_forms["indicator_close"] = closed_form_indicator(s, p, "close_screened")
        report.closed_forms["indicator_far"] = closed_form_indicator(s, p, "far_screened")
        report.closed_forms["indicator_unscreened_slope"] = 2 - sp
        expected = {"unscreened": "divergent", "close": "finite", "far": "finite"}
        if report.indicator != expected:
            raise ContainmentViolation(f"indicator verdicts {report.indicator} != {expected}",
                                       [k for k in KINDS if report.indicator[k] != expected[k]])
    if lam is not None:
        clamp = catalog.get("powerlaw_clamp", lam=lam)
        for kind in ("close", "far"):
            fit = divergence_exponent(clamp, kind, params, powerlaw_radii)
            report.fits[f"powerlaw_{kind}"] = fit
            report.powerlaw[kind] = _verdict(fit)
        report.closed_forms["powerlaw_far_slope"] = lam * p - sp
        expected = {"close": "finite", "far": "divergent"}
        if report.powerlaw != expected:
            raise ContainmentViolation(f"max(1, x^lam) verdicts {report.powerlaw} != {expected}",
                                       [k for k in expected if report.powerlaw[k] != expected[k]])
    return report
