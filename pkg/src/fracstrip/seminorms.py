"""Gagliardo, screened and slice seminorms, trace functionals and the
two-sided equivalence checks between slice sums and the bulk seminorm.

All values are p-th powers.  Boundary functions live on a truncation
:class:`~fracstrip.domain.Box`; bulk functions live on a
:class:`~fracstrip.domain.StripDomain`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domain import Box, SeminormParams, StripDomain
from .errors import DomainError, EquivalenceViolation, ParameterError
from .quadrature import (IntegralEstimate, LagRule, QuadratureConfig, double_integral_singular,
                         estimate_from_levels, gauss_panels, lag_integral, pairwise_sum)

KINDS = ("gagliardo", "close_screened", "far_screened", "slice_vertical",
         "slice_horizontal_near", "slice_horizontal_far", "difference_trace",
         "weighted_lp_trace")

DEFAULT_HALF_WIDTH = 8.0


@dataclass(frozen=True)
class SeminormReport:
    kind: str
    value_p: float
    estimate: IntegralEstimate
    params: SeminormParams
    domain: dict
    budget: float | None = None

    @property
    def seminorm(self) -> float:
        return max(self.value_p, 0.0) ** (1.0 / self.params.p)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "value_p": _num(self.value_p), "seminorm": _num(self.seminorm),
               "refinement_delta": _num(self.estimate.refinement_delta),
               "tail_bound": _num(self.estimate.tail_bound),
               "params": self.params.to_dict(), "domain": self.domain}
        if self.budget is not None:
            out["budget"] = _num(self.budget)
        return out


def _num(v: float):
    v = float(v)
    return v if math.isfinite(v) else ("inf" if v > 0 else "nan")


# ---------------------------------------------------------------------------
# helpers


def _rule_for(fn, base: LagRule | None = None) -> LagRule:
    if base is not None:
        return base
    return LagRule(scale=float(getattr(fn, "scale", 0.25)), core=getattr(fn, "core", None))


def _line(fn: Callable) -> Callable:
    return lambda x: np.asarray(fn(np.asarray(x, float)[..., None]), float)


def _screen_fn(screen):
    """Normalize a screen to ``(value_or_callable, is_constant)``; validates positivity."""
    if callable(screen):
        return screen, False
    value = float(screen)
    if not value > 0:
        raise DomainError(f"screen must be positive, got {screen}")
    return value, True


def _check_profile_positive(screen, box: Box):
    if callable(screen):
        xs = np.linspace(box.lo[0], box.hi[0], 2001)[:, None] if box.dim == 1 else None
        if xs is not None and np.min(screen(xs)) <= 0:
            raise DomainError("screen profile must be positive on the box")


def _boundary_box(params: SeminormParams, box: Box | None) -> Box:
    dim = params.N - 1
    if dim < 1:
        raise ParameterError("boundary seminorms need N >= 2")
    box = box or Box.centered(dim, DEFAULT_HALF_WIDTH)
    if box.dim != dim:
        raise DomainError(f"box dimension {box.dim} does not match N - 1 = {dim}")
    return box


def tail_estimate(fn, box: Box, p: float, exponent: float, region: str = "all",
                  screen=None, weighted: bool = False) -> float:
    """Rough size of the pair contributions lost by truncating to ``box``.

    Uses the entry's decay envelope beyond the box and, for functions with
    different limits at the two ends of the line, the exact cross-pair mass
    of a unit jump.  Functions without decay metadata get ``nan``.
    """
    envelope = getattr(fn, "envelope", None)
    if envelope is None:
        return math.nan
    edges = [abs(v) for v in (*box.lo, *box.hi)]
    env = max(envelope(min(edges)), 0.0)
    if not math.isfinite(env):
        return math.inf
    width = float(np.max(box.widths))
    lam = exponent - (box.dim - 1)
    if screen is None or callable(screen):
        h0 = 1.0
        w2 = 1.0
    else:
        h0 = float(screen)
        w2 = h0 * h0 if weighted else 1.0
    if region == "near":
        tail = (2 * env) ** p * 2 * width * (h0 if lam < 1 else 1.0)
        return float(tail)
    kernel_mass = 2 * h0 ** (1 - lam) / (lam - 1) if lam > 1 else math.inf
    tail = 2 * (2 * env) ** p * width * kernel_mass * w2
    limits = getattr(fn, "limits", (0.0, 0.0))
    jump = abs(limits[1] - limits[0]) if all(map(math.isfinite, limits)) else math.inf
    if jump > 0:
        if lam <= 2:
            return math.inf
        cross = sum(e ** (2 - lam) for e in edges[: 2]) / ((lam - 1) * (lam - 2))
        tail += 2 * jump ** p * cross * w2
    return float(tail)


def screened_integral(g: Callable, box: Box, p: float, exponent: float, *, region: str = "all",
                      screen=None, weighted: bool = False, rule: LagRule | None = None,
                      config: QuadratureConfig | None = None, route: str = "auto",
                      label: str = "seminorm") -> IntegralEstimate:
    """Generic boundary double integral with an explicit kernel exponent.

    The one-dimensional case runs on the lag route at two resolutions; in
    two dimensions (N = 3 boundaries) the cell-pair rule is used with the
    region as a pair weight.
    """
    if region != "all":
        screen, _ = _screen_fn(screen)
        _check_profile_positive(screen, box)
    tail = tail_estimate(g, box, p, exponent, region, screen, weighted)
    if box.dim == 1 and route in ("auto", "lag"):
        base = _rule_for(g, rule)
        bps = tuple(getattr(g, "breakpoints", ()))
        fn = _line(g)
        levels = [float(lag_integral(fn, box.lo[0], box.hi[0], p, exponent, region=region,
                                     screen=_line_screen(screen), weighted=weighted,
                                     breakpoints=bps, rule=r))
                  for r in (base, base.refined())]
        return estimate_from_levels(levels, tail, label=label)
    pair_weight = _region_weight(region, screen, weighted)
    est = double_integral_singular(g, box, p, exponent, config, pair_weight=pair_weight,
                                   label=label)
    return est.with_tail(tail)


def _line_screen(screen):
    if screen is None or not callable(screen):
        return screen
    return lambda x: np.asarray(screen(np.asarray(x, float)[..., None]), float)


def _region_weight(region, screen, weighted):
    if region == "all":
        return None

    def at(points):
        if callable(screen):
            return np.asarray(screen(points), float)
        return float(screen)

    def weight(X, Y):
        dist = np.sqrt(np.sum((X - Y) ** 2, axis=-1))
        rx = at(X)
        if region == "near":
            return (dist < rx).astype(float)
        w = (dist >= rx).astype(float)
        return w * rx * at(Y) if weighted else w

    return weight


# ---------------------------------------------------------------------------
# named seminorms


def gagliardo(u: Callable, params: SeminormParams, domain, *, config=None, rule=None,
              route: str = "auto", order: float | None = None) -> SeminormReport:
    """``int int |u(x) - u(y)|^p / |x - y|^(dim + order * p)`` over the domain.

    ``domain`` is a :class:`StripDomain` (bulk, ``dim = N``) or a
    :class:`Box` (boundary, ``dim = box.dim``).  ``order`` defaults to ``s``.
    """
    order = params.s if order is None else order
    p = params.p
    if isinstance(domain, Box):
        exponent = domain.dim + order * p
        est = screened_integral(u, domain, p, exponent, rule=rule, config=config, route=route,
                                label="gagliardo")
        desc = {"kind": "boundary", "box": domain.to_dict()}
        return SeminormReport("gagliardo", est.value, est, params, desc)
    if not isinstance(domain, StripDomain):
        raise DomainError("gagliardo needs a Box or StripDomain")
    N = domain.N
    exponent = N + order * p
    if N == 1:
        b = float(domain.b)
        base = _rule_for(u, rule) if rule else LagRule(scale=b / 8)
        fn = _line(u)
        levels = [float(lag_integral(fn, 0.0, b, p, exponent, rule=r))
                  for r in (base, base.refined())]
        est = estimate_from_levels(levels, label="gagliardo")
    else:
        inside = None if domain.is_rectangle() else domain.contains
        est = double_integral_singular(u, domain.bounding_box(), p, exponent, config,
                                       inside=inside, label="gagliardo")
    return SeminormReport("gagliardo", est.value, est, params, domain.to_dict())


def close_screened(g: Callable, screen, params: SeminormParams, box: Box | None = None, *,
                   exponent: float | None = None, rule=None, config=None) -> SeminormReport:
    """Pairs closer than ``screen(x')``; default kernel exponent ``N - 2 + sp``."""
    box = _boundary_box(params, box)
    exponent = params.N - 2 + params.sp if exponent is None else exponent
    est = screened_integral(g, box, params.p, exponent, region="near", screen=screen,
                            rule=rule, config=config, label="close_screened")
    return SeminormReport("close_screened", est.value, est, params,
                          _boundary_desc(box, screen, exponent))


def far_screened(g: Callable, screen, params: SeminormParams, box: Box | None = None, *,
                 exponent: float | None = None, weighted: bool = True, rule=None,
                 config=None) -> SeminormReport:
    """Pairs at distance at least ``screen(x')``, weighted by ``screen(x') screen(y')``;
    default kernel exponent ``N + sp``."""
    box = _boundary_box(params, box)
    exponent = params.N + params.sp if exponent is None else exponent
    est = screened_integral(g, box, params.p, exponent, region="far", screen=screen,
                            weighted=weighted, rule=rule, config=config, label="far_screened")
    desc = _boundary_desc(box, screen, exponent)
    desc["weighted"] = weighted
    return SeminormReport("far_screened", est.value, est, params, desc)


def _boundary_desc(box: Box, screen, exponent) -> dict:
    if callable(screen):
        scr = screen.to_dict() if hasattr(screen, "to_dict") else "custom"
    else:
        scr = float(screen)
    return {"kind": "boundary", "box": box.to_dict(), "screen": scr, "exponent": exponent}


# ---------------------------------------------------------------------------
# slice functionals (N = 2)


def _require_planar(domain: StripDomain):
    if not isinstance(domain, StripDomain) or domain.N != 2:
        raise DomainError("slice functionals are implemented for N = 2 strips")


def _outer_nodes(box: Box, order: int, scale: float = 0.25):
    n = max(1, int(math.ceil((box.hi[0] - box.lo[0]) / scale)))
    return gauss_panels(np.linspace(box.lo[0], box.hi[0], n + 1), order)


def _two_levels(compute, label) -> IntegralEstimate:
    return estimate_from_levels([compute(0), compute(1)], label=label)


def slice_vertical(u: Callable, params: SeminormParams, domain: StripDomain) -> SeminormReport:
    """``int dx' |u(x', .)|^p`` of the 1-D Gagliardo seminorm on ``(0, height(x'))``."""
    _require_planar(domain)
    p, sp = params.p, params.sp

    def compute(level):
        xs, wx = _outer_nodes(domain.box, 8 + 4 * level)
        height = domain.height(xs[:, None])
        rule = LagRule(scale=1 / 8) if level == 0 else LagRule(scale=1 / 8).refined()

        def slices(t):
            pts = np.stack(np.broadcast_arrays(xs[:, None], height[:, None] * t[None, :]), -1)
            return u(pts)

        vals = lag_integral(slices, 0.0, 1.0, p, 1 + sp, rule=rule)
        return float(pairwise_sum(wx * height ** (1 - sp) * vals))

    est = _two_levels(compute, "slice_vertical")
    return SeminormReport("slice_vertical", est.value, est, params, domain.to_dict())


def _height_nodes(top: float, order: int):
    return gauss_panels(np.linspace(0.0, top, 5), order)


def slice_horizontal_near(u: Callable, params: SeminormParams,
                          domain: StripDomain) -> SeminormReport:
    """Close-screened seminorms of horizontal slices (exponent ``N - 1 + sp``).

    Flat strips use screen ``b`` over all heights; graph domains use
    heights below ``height(x')/2`` and screen ``height(x')/2``.
    """
    _require_planar(domain)
    p = params.p
    exponent = domain.N - 1 + params.sp
    lo, hi = domain.box.lo[0], domain.box.hi[0]
    flat = domain.kind == "flat"
    top = float(domain.b) if flat else domain.height_range()[1] / 2

    def compute(level):
        ts, wt = _height_nodes(top, 8 + 4 * level)
        rule = _rule_for(u) if level == 0 else _rule_for(u).refined()

        def slices(x):
            pts = np.stack(np.broadcast_arrays(x[None, :], ts[:, None]), -1)
            return u(pts)

        if flat:
            vals = lag_integral(slices, lo, hi, p, exponent, region="near", screen=float(domain.b),
                                rule=rule)
        else:
            half = lambda x: 0.5 * domain.height(np.asarray(x)[..., None])
            below = lambda x, h: (ts[:, None] < half(x)[None, :]).astype(float)
            vals = lag_integral(slices, lo, hi, p, exponent, region="near", screen=half,
                                extra_weight=below, rule=rule)
        return float(pairwise_sum(wt * vals))

    est = _two_levels(compute, "slice_horizontal_near")
    return SeminormReport("slice_horizontal_near", est.value, est, params, domain.to_dict())


def slice_horizontal_far(u: Callable, params: SeminormParams,
                         domain: StripDomain) -> SeminormReport:
    """Unweighted far-kernel seminorms (exponent ``N + sp``, pairs at distance >= b)."""
    _require_planar(domain)
    if domain.kind != "flat":
        raise DomainError("slice_horizontal_far is defined for flat strips only")
    p = params.p
    exponent = domain.N + params.sp
    b = float(domain.b)

    def compute(level):
        ts, wt = _height_nodes(b, 8 + 4 * level)
        rule = _rule_for(u) if level == 0 else _rule_for(u).refined()

        def slices(x):
            return u(np.stack(np.broadcast_arrays(x[None, :], ts[:, None]), -1))

        vals = lag_integral(slices, domain.box.lo[0], domain.box.hi[0], p, exponent,
                            region="far", screen=b, rule=rule)
        return float(pairwise_sum(wt * vals))

    est = _two_levels(compute, "slice_horizontal_far")
    return SeminormReport("slice_horizontal_far", est.value, est, params, domain.to_dict())


# ---------------------------------------------------------------------------
# trace functionals


def difference_trace(params: SeminormParams, domain: StripDomain, u: Callable | None = None,
                     f_plus: Callable | None = None,
                     f_minus: Callable | None = None) -> SeminormReport:
    """``int |f+ - f-|^p`` (flat) or ``int |f+ - f-|^p height^(1 - sp)`` (graph).

    Boundary values come from ``u`` at the bottom and top layers unless
    ``f_plus``/``f_minus`` are given.
    """
    params.require_trace_regime()
    if u is None and (f_plus is None or f_minus is None):
        raise ParameterError("difference_trace needs u or both boundary functions")
    box = domain.box
    if box.dim != 1:
        raise DomainError("difference_trace is implemented for N = 2")

    def values(xs):
        height = domain.height(xs[:, None])
        if f_plus is not None:
            top, bottom = f_plus(xs[:, None]), f_minus(xs[:, None])
        else:
            top = u(np.stack([xs, height], -1))
            bottom = u(np.stack([xs, np.zeros_like(xs)], -1))
        diff = np.abs(np.asarray(top, float) - np.asarray(bottom, float)) ** params.p
        if domain.kind == "graph":
            diff = diff * height ** (1 - params.sp)
        return diff

    def compute(level):
        xs, wx = _outer_nodes(box, 8 + 4 * level, 0.125)
        return float(pairwise_sum(wx * values(xs)))

    est = _two_levels(compute, "difference_trace")
    return SeminormReport("difference_trace", est.value, est, params, domain.to_dict())


def weighted_lp_trace(f: Callable, r: float, profile, p: float, box: Box | None = None) -> float:
    """``int |f|^p min(r, profile(x')) dx'`` over the truncation box."""
    if not r > 0:
        raise ParameterError("r must be positive")
    box = box or Box.centered(1, DEFAULT_HALF_WIDTH)
    xs, wx = _outer_nodes(box, 12, 0.125)
    pts = xs[:, None]
    eta = np.asarray(profile(pts), float) if callable(profile) else np.full(len(xs), float(profile))
    vals = np.abs(np.asarray(f(pts), float)) ** p * np.minimum(r, eta)
    return float(pairwise_sum(wx * vals))


# ---------------------------------------------------------------------------
# equivalence checks


@dataclass(frozen=True)
class EquivalenceReport:
    slice_sum: float
    bulk: float
    parts: dict
    budget: float | None
    restricted_bulk: float | None = None
    drift: float | None = None
    notes: dict = field(default_factory=dict)

    @property
    def upper_ratio(self) -> float:
        """slice sum / bulk seminorm."""
        return _ratio(self.slice_sum, self.bulk)

    @property
    def lower_ratio(self) -> float:
        """bulk seminorm / slice sum."""
        return _ratio(self.bulk, self.slice_sum)

    @property
    def restricted_ratio(self) -> float | None:
        """restricted bulk integral / slice sum (graph domains)."""
        if self.restricted_bulk is None:
            return None
        return _ratio(self.restricted_bulk, self.slice_sum)

    @property
    def ratios(self) -> list[float]:
        out = [self.upper_ratio, self.lower_ratio]
        if self.restricted_bulk is not None:
            out.append(self.restricted_ratio)
        return out

    @property
    def passes(self) -> bool:
        if self.budget is None:
            return True
        return all(r <= self.budget for r in self.ratios)

    def to_json(self) -> dict:
        out = {"slice_sum": _num(self.slice_sum), "bulk": _num(self.bulk),
               "parts": {k: _num(v) for k, v in self.parts.items()},
               "upper_ratio": _num(self.upper_ratio), "lower_ratio": _num(self.lower_ratio),
               "budget": None if self.budget is None else _num(self.budget),
               "pass": self.passes}
        if self.restricted_bulk is not None:
            out["restricted_bulk"] = _num(self.restricted_bulk)
            out["restricted_ratio"] = _num(self.restricted_ratio)
        if self.drift is not None:
            out["drift"] = _num(self.drift)
        return out


ZERO_TOL = 1e-10


def _ratio(a: float, b: float) -> float:
    if abs(a) <= ZERO_TOL and abs(b) <= ZERO_TOL:
        return 1.0
    if abs(b) <= ZERO_TOL:
        return math.inf
    return a / b


def _check_zero_consistency(S: float, G: float, scale: float):
    tol = ZERO_TOL * max(1.0, scale)
    if (S <= tol) != (G <= tol):
        raise EquivalenceViolation(f"one side vanishes: slice sum {S:g}, bulk {G:g}")


def equivalence_check_flat(u: Callable, params: SeminormParams, domain: StripDomain,
                           config: QuadratureConfig | None = None,
                           budget: float | None = None) -> EquivalenceReport:
    """Slice sum ``vertical + near + b * far`` against the bulk Gagliardo seminorm."""
    if domain.kind != "flat":
        raise DomainError("equivalence_check_flat needs a flat strip")
    parts = {"slice_vertical": slice_vertical(u, params, domain).value_p,
             "slice_horizontal_near": slice_horizontal_near(u, params, domain).value_p,
             "slice_horizontal_far": slice_horizontal_far(u, params, domain).value_p}
    S = parts["slice_vertical"] + parts["slice_horizontal_near"] + \
        float(domain.b) * parts["slice_horizontal_far"]
    G_report = gagliardo(u, params, domain, config=config)
    G = G_report.value_p
    _check_zero_consistency(S, G, max(S, G))
    report = EquivalenceReport(S, G, parts, budget, drift=G_report.estimate.relative_delta)
    if budget is not None and not report.passes:
        raise EquivalenceViolation(f"flat equivalence ratios exceed budget {budget:g}: "
                                   f"{report.upper_ratio:g}, {report.lower_ratio:g}")
    return report


RESTRICTED_CONFIG = QuadratureConfig(cells_per_axis=8)


def restricted_gagliardo(u: Callable, params: SeminormParams, domain: StripDomain,
                         config: QuadratureConfig | None = None) -> IntegralEstimate:
    """Bulk seminorm over heights below ``height/8`` and lateral distance below ``height(x')/2``.

    The layer is thin, so the default grid resolves its height with 8 cells.
    """
    N, p = domain.N, params.p
    config = config or RESTRICTED_CONFIG
    box = domain.box
    top = domain.height_range()[1] / 8
    region = box.extended((0.0,), (top,))

    def inside(X):
        return X[..., -1] < domain.height(X[..., :-1]) / 8

    def pair_weight(X, Y):
        lateral = np.sqrt(np.sum((X[..., :-1] - Y[..., :-1]) ** 2, axis=-1))
        return (lateral < domain.height(X[..., :-1]) / 2).astype(float)

    return double_integral_singular(u, region, p, N + params.sp, config, inside=inside,
                                    pair_weight=pair_weight, label="restricted gagliardo")


def equivalence_check_general(u: Callable, params: SeminormParams, domain: StripDomain,
                              config: QuadratureConfig | None = None,
                              budget: float | None = None,
                              restricted_config: QuadratureConfig | None = None
                              ) -> EquivalenceReport:
    """Graph-domain slice sum (vertical up to ``height``, horizontal near with
    radius ``height/2``) against the bulk seminorm, in both directions, plus
    the restricted bulk integral over the thin layer against the slice sum."""
    if domain.kind == "graph" and domain.profile.lipschitz_bound > 1 + 1e-12:
        raise DomainError("general equivalence needs a profile with Lipschitz bound <= 1; "
                          "rescale with dilate_vertical first")
    parts = {"slice_vertical": slice_vertical(u, params, domain).value_p,
             "slice_horizontal_near": slice_horizontal_near(u, params, domain).value_p}
    S = parts["slice_vertical"] + parts["slice_horizontal_near"]
    G_report = gagliardo(u, params, domain, config=config)
    G = G_report.value_p
    R = restricted_gagliardo(u, params, domain, restricted_config).value
    _check_zero_consistency(S, G, max(S, G))
    report = EquivalenceReport(S, G, parts, budget, restricted_bulk=R,
                               drift=G_report.estimate.relative_delta)
    if budget is not None and not report.passes:
        raise EquivalenceViolation(f"general equivalence ratios exceed budget {budget:g}: "
                                   f"{report.ratios}")
    return report
