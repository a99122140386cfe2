"""Mollification extension operators, cutoffs and the mollifier inequality checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate

from .domain import Box, LipschitzProfile, SeminormParams, StripDomain
from .errors import BoundViolation, DomainError, ParameterError
from .quadrature import gauss_panels, pairwise_sum

MIDPOINT_NODES = 31


def _bump_profile(r2):
    inside = r2 < 1
    return np.where(inside, np.exp(-1.0 / np.where(inside, 1 - r2, 1.0)), 0.0)


@dataclass(frozen=True)
class Mollifier:
    """``c * exp(-1 / (1 - |w|^2))`` on the unit ball of R^dim, unit mass.

    The extension integral uses a fixed midpoint rule with ``31^dim`` nodes on
    ``[-1, 1]^dim``; the discrete weights are renormalized to sum to one so
    constants and affine functions are reproduced exactly.
    """

    dim: int = 1
    smoothness: str = "C-infinity"

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ParameterError("mollifier dimension must be 1 or 2")

    @cached_property
    def constant(self) -> float:
        f = lambda r: math.exp(-1.0 / (1.0 - r * r)) if r < 1 else 0.0
        if self.dim == 1:
            mass = 2 * integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)[0]
        else:
            mass = 2 * math.pi * integrate.quad(lambda r: r * f(r), 0.0, 1.0,
                                                epsabs=1e-14, epsrel=1e-13)[0]
        return 1.0 / mass

    def __call__(self, w) -> np.ndarray:
        w = np.asarray(w, float)
        return self.constant * _bump_profile(np.sum(w * w, axis=-1))

    def mass(self) -> float:
        """Continuous integral of the normalized mollifier (should be 1)."""
        if self.dim == 1:
            return integrate.quad(lambda t: float(self(np.array([t]))), -1, 1,
                                  epsabs=1e-14, epsrel=1e-13)[0]
        return 2 * math.pi * integrate.quad(lambda r: r * float(self(np.array([r, 0.0]))), 0, 1,
                                            epsabs=1e-14, epsrel=1e-13)[0]

    @cached_property
    def rule(self) -> tuple[np.ndarray, np.ndarray]:
        t = -1.0 + (np.arange(MIDPOINT_NODES) + 0.5) * 2.0 / MIDPOINT_NODES
        nodes = np.stack(np.meshgrid(*([t] * self.dim), indexing="ij"), -1).reshape(-1, self.dim)
        weights = self(nodes)
        keep = weights > 0
        nodes, weights = nodes[keep], weights[keep]
        return nodes, weights / weights.sum()

    @cached_property
    def gradient_sup(self) -> float:
        r = np.linspace(0.0, 1.0, 200001)[:-1]
        one = 1 - r * r
        deriv = self.constant * np.exp(-1.0 / one) * 2 * r / one ** 2
        return float(deriv.max())


@dataclass(frozen=True)
class Cutoff:
    """Quintic smoothstep cutoff: 1 at 0, 0 from 1 on, C^2 at both ends."""

    name: str = "quintic"
    derivative_bound: float = 3.0

    def __call__(self, t) -> np.ndarray:
        t = np.clip(np.asarray(t, float), 0.0, 1.0)
        return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)

    def derivative(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        inner = -30.0 * t * t * (1.0 - t) ** 2
        return np.where((t > 0) & (t < 1), inner, 0.0)


def _clamped(g: Callable, box: Box | None, flags: dict) -> Callable:
    if box is None:
        return g
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)

    def inner(y):
        y = np.asarray(y, float)
        clipped = np.clip(y, lo, hi)
        if not flags.get("outside_box") and np.any(clipped != y):
            flags["outside_box"] = True
        return g(clipped)

    return inner


class MollifiedExtension:
    """``u(x', x_N) = sum_j w_j g(x' + factor * x_N * node_j)``.

    Evaluation beyond the truncation box continues ``g`` by its nearest box
    value; the first such evaluation sets ``flags["outside_box"]``.
    """

    def __init__(self, g: Callable, mollifier: Mollifier, factor: float,
                 domain: StripDomain | None = None, box: Box | None = None):
        self.g = g
        self.mollifier = mollifier
        self.factor = float(factor)
        self.domain = domain
        self.flags: dict = {"outside_box": False}
        self._g = _clamped(g, box, self.flags)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        nodes, weights = self.mollifier.rule
        xp, xn = pts[..., :-1], pts[..., -1]
        samples = xp[..., None, :] + (self.factor * xn)[..., None, None] * nodes
        return np.asarray(self._g(samples), float) @ weights


def extend_flat(g: Callable, b: float, mollifier: Mollifier | None = None,
                params: SeminormParams | None = None, *, box: Box | None = None,
                radius_factor: float = 1.0) -> MollifiedExtension:
    """Mollify ``g`` at radius ``radius_factor * x_N`` on the flat strip of height ``b``."""
    if params is not None:
        params.require_trace_regime()
    if not b > 0:
        raise DomainError("strip height must be positive")
    mollifier = mollifier or Mollifier()
    domain = StripDomain("flat", box, b=b) if box is not None else None
    return MollifiedExtension(g, mollifier, radius_factor, domain, box)


def extend_general(g: Callable, profile: LipschitzProfile, mollifier: Mollifier | None = None,
                   params: SeminormParams | None = None, *, radius_factor: float = 1 / 8,
                   box: Box | None = None) -> MollifiedExtension:
    """Mollify ``g`` at radius ``x_N / 8`` on the graph domain of ``profile``."""
    if params is not None:
        params.require_trace_regime()
    if profile.lipschitz_bound > 1 + 1e-12:
        raise DomainError("extend_general needs Lipschitz bound <= 1; rescale with "
                          "dilate_vertical first")
    mollifier = mollifier or Mollifier(profile.dim)
    box = box or profile.box
    return MollifiedExtension(g, mollifier, radius_factor, StripDomain("graph", box,
                                                                      profile=profile), box)


@dataclass(frozen=True)
class WeightedHypothesis:
    """``int |g|^p / height^(sp - 1)`` on the box and on the half box."""

    value: float
    half_box_value: float

    @property
    def divergent(self) -> bool:
        if not math.isfinite(self.value):
            return True
        return self.value > 1.01 * self.half_box_value + 1e-12


def weighted_hypothesis(g: Callable, profile: Callable, params: SeminormParams,
                        box: Box) -> WeightedHypothesis:
    out = []
    for scale in (1.0, 0.5):
        lo, hi = box.lo[0] * scale, box.hi[0] * scale
        n = max(1, int(math.ceil((hi - lo) / 0.125)))
        xs, wx = gauss_panels(np.linspace(lo, hi, n + 1), 10)
        pts = xs[:, None]
        vals = np.abs(np.asarray(g(pts), float)) ** params.p / np.asarray(profile(pts),
                                                                         float) ** (params.sp - 1)
        out.append(float(pairwise_sum(wx * vals)))
    return WeightedHypothesis(out[0], out[1])


class CutoffExtension:
    """``u(x', x_N) = cutoff(x_N / height(x')) * u0(x', x_N)``.

    With ``radius`` set, the height is replaced by ``min(radius, height)``
    (the non-homogeneous variant).
    """

    def __init__(self, u0: Callable, profile: Callable, cutoff: Cutoff,
                 hypothesis: WeightedHypothesis | None, radius: float | None = None):
        self.u0 = u0
        self.profile = profile
        self.cutoff = cutoff
        self.hypothesis = hypothesis
        self.radius = radius

    @property
    def flags(self) -> dict:
        out = dict(getattr(self.u0, "flags", {}))
        out["weighted_hypothesis_divergent"] = bool(self.hypothesis and self.hypothesis.divergent)
        return out

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        height = np.asarray(self.profile(pts[..., :-1]), float)
        if self.radius is not None:
            height = np.minimum(self.radius, height)
        return self.cutoff(pts[..., -1] / height) * self.u0(pts)


def cutoff_one_side(u0: Callable, profile: Callable, cutoff: Cutoff | None = None, *,
                    g: Callable | None = None, params: SeminormParams | None = None,
                    box: Box | None = None, radius: float | None = None) -> CutoffExtension:
    """Zero the upper trace of ``u0``; reports the weighted L^p hypothesis when ``g`` is given."""
    cutoff = cutoff or Cutoff()
    hyp = None
    if g is not None and params is not None:
        box = box or getattr(profile, "box", None) or Box.centered(1, 8.0)
        hyp = weighted_hypothesis(g, profile, params, box)
    return CutoffExtension(u0, profile, cutoff, hyp, radius)


class TwoSidedExtension:
    """``u = v + u_minus`` with ``v(x', x_N) = cutoff(1 - x_N/b) u_h(x', b - x_N)``.

    ``u_minus`` mollifies ``f_minus``; ``u_h`` mollifies the top mismatch
    ``h = f_plus - u_minus(., b)``.  The bottom trace is ``f_minus`` and the
    top trace ``f_plus``.
    """

    def __init__(self, f_plus, f_minus, b, mollifier, cutoff, box):
        self.f_plus, self.f_minus, self.b = f_plus, f_minus, float(b)
        self.cutoff = cutoff
        self.u_minus = extend_flat(f_minus, b, mollifier, box=box)

        def top_mismatch(y):
            y = np.asarray(y, float)
            top = np.concatenate([y, np.full(y.shape[:-1] + (1,), self.b)], axis=-1)
            return np.asarray(f_plus(y), float) - self.u_minus(top)

        self.mismatch = top_mismatch
        self.u_h = extend_flat(top_mismatch, b, mollifier, box=box)

    @property
    def flags(self) -> dict:
        return {"outside_box": bool(self.u_minus.flags["outside_box"]
                                    or self.u_h.flags["outside_box"])}

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        depth = self.b - pts[..., -1]
        mirrored = np.concatenate([pts[..., :-1], depth[..., None]], axis=-1)
        return self.cutoff(depth / self.b) * self.u_h(mirrored) + self.u_minus(pts)


def extend_two_sided_flat(f_plus: Callable, f_minus: Callable, b: float,
                          mollifier: Mollifier | None = None, cutoff: Cutoff | None = None,
                          params: SeminormParams | None = None,
                          box: Box | None = None) -> TwoSidedExtension:
    """Extension with prescribed traces ``f_minus`` at ``x_N = 0`` and ``f_plus`` at ``x_N = b``."""
    if params is not None:
        params.require_trace_regime()
    if not b > 0:
        raise DomainError("strip height must be positive")
    return TwoSidedExtension(f_plus, f_minus, b, mollifier or Mollifier(), cutoff or Cutoff(), box)


@dataclass(frozen=True)
class HypothesisSum:
    difference_lp: float
    close: tuple
    far: tuple
    divergent: bool

    @property
    def total(self) -> float:
        return self.difference_lp + sum(self.close) + sum(self.far)


def two_sided_hypotheses(f_plus, f_minus, b: float, params: SeminormParams,
                         box: Box) -> HypothesisSum:
    """``||f+ - f-||_p^p`` plus close and far screened seminorms (screen ``b``) of both traces."""
    from .seminorms import close_screened, far_screened

    n = max(1, int(math.ceil((box.hi[0] - box.lo[0]) / 0.125)))
    xs, wx = gauss_panels(np.linspace(box.lo[0], box.hi[0], n + 1), 10)
    diff = np.abs(np.asarray(f_plus(xs[:, None]), float) -
                  np.asarray(f_minus(xs[:, None]), float)) ** params.p
    lp = float(pairwise_sum(wx * diff))
    close, far, tails = [], [], []
    for f in (f_plus, f_minus):
        c = close_screened(f, b, params, box)
        fr = far_screened(f, b, params, box)
        close.append(c.value_p)
        far.append(fr.value_p)
        tails.extend([c.estimate.tail_bound, fr.estimate.tail_bound])
    divergent = any(not math.isfinite(t) for t in tails if not math.isnan(t))
    return HypothesisSum(lp, tuple(close), tuple(far), divergent)


# ---------------------------------------------------------------------------
# inequality checks


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: np.ndarray
    rhs: np.ndarray
    budget: float

    @property
    def ratios(self) -> np.ndarray:
        lhs, rhs = np.atleast_1d(self.lhs), np.atleast_1d(self.rhs)
        return np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0),
                        np.where(lhs > 1e-300, np.inf, 0.0))

    @property
    def passes(self) -> bool:
        return bool(np.all(self.ratios <= self.budget))

    def offending(self) -> list:
        return [int(i) for i in np.flatnonzero(self.ratios > self.budget)]


def lateral_constant(mollifier: Mollifier, p: float) -> float:
    """Constant from differentiating the mollified integral and Hölder:
    ``sup|grad phi|^p * |B_1|^(p - 1)``."""
    ball = 2.0 if mollifier.dim == 1 else math.pi
    return mollifier.gradient_sup ** p * ball ** (p - 1)


def lateral_bound_check(u: MollifiedExtension, g: Callable, samples, params: SeminormParams,
                        budget: float | None = None) -> InequalityReport:
    """Check ``|u(x') - u(x'+h')|^p <= C |h'|^(p-1) x_N^-(p+N-1) * I`` at each sample.

    ``I`` integrates ``|g(y') - g(z)|^p`` over ``y'`` in the ball of radius
    ``x_N`` around ``z = x' + r h'/|h'|`` and ``r`` in ``(0, |h'|)``.
    ``samples`` rows are ``(x', h', x_N)`` on the line.
    """
    p, N = params.p, 2
    samples = np.atleast_2d(np.asarray(samples, float))
    if budget is None:
        budget = 2.0 * lateral_constant(u.mollifier, p)
    rs, wr = gauss_panels(np.linspace(0.0, 1.0, 5), 8)
    ts, wt = gauss_panels(np.array([-1.0, -0.5, 0.0, 0.5, 1.0]), 10)
    lhs, rhs = [], []
    for x, h, xn in samples:
        a = np.asarray(u(np.array([[x, xn], [x + h, xn]])), float)
        lhs.append(abs(a[0] - a[1]) ** p)
        length = abs(h)
        if length == 0:
            rhs.append(0.0)
            continue
        z = x + np.sign(h) * length * rs
        y = z[:, None] + xn * ts[None, :]
        gz = np.asarray(g(z[:, None]), float)
        gy = np.asarray(g(y[..., None]), float)
        inner = (np.abs(gy - gz[:, None]) ** p) @ (xn * wt)
        integral = length * float(inner @ wr)
        rhs.append(length ** (p - 1) / xn ** (p + N - 1) * integral)
    report = InequalityReport("lateral_bound", np.asarray(lhs), np.asarray(rhs), budget)
    if not report.passes:
        raise BoundViolation("lateral bound violated", report.offending())
    return report


def hardy_constant(params: SeminormParams) -> float:
    """``1 / (s^p (p - sp))`` from Hardy's inequality followed by the y-substitution."""
    return 1.0 / (params.s ** params.p * (params.p - params.sp))


def vertical_bound_check(u: Callable, b: float, params: SeminormParams,
                         derivative: Callable | None = None,
                         budget: float | None = None) -> InequalityReport:
    """Compare ``int_0^b int_0^b |u(x+t) - u(x)|^p t^(-1-sp) dt dx`` with
    ``int_0^2b y^(p - sp) |u'(y)|^p dy`` for a function of one variable."""
    p, sp = params.p, params.sp
    if budget is None:
        budget = hardy_constant(params)
    if derivative is None:
        step = 1e-6 * max(b, 1.0)
        derivative = lambda y: (u(y + step) - u(y - step)) / (2 * step)
    t_edges = np.unique(np.concatenate([b * 2.0 ** -np.arange(40.0)[::-1],
                                        np.linspace(0, b, 17)]))
    ts, wt = gauss_panels(t_edges, 8)
    xs, wx = gauss_panels(np.linspace(0.0, b, 17), 8)
    diff = np.abs(u(xs[None, :] + ts[:, None]) - u(xs[None, :])) ** p
    lhs = float(pairwise_sum((wt * ts ** (-1 - sp)) * (diff @ wx)))
    y_edges = np.unique(np.concatenate([2 * b * 2.0 ** -np.arange(40.0)[::-1],
                                        np.linspace(0, 2 * b, 33)]))
    ys, wy = gauss_panels(y_edges, 8)
    rhs = float(pairwise_sum(wy * ys ** (p - sp) * np.abs(derivative(ys)) ** p))
    report = InequalityReport("vertical_bound", np.asarray(lhs), np.asarray(rhs), budget)
    if not report.passes:
        raise BoundViolation(f"vertical bound violated: lhs {lhs:g} > {budget:g} * {rhs:g}")
    return report
