"""Singular double-integral engine and the slicing kernels.

Two integration routes are provided:

* :func:`double_integral_singular` integrates
  ``w(x, y) |u(x) - u(y)|^p / |x - y|^lam`` over ``D x D`` for boxes (or
  masked boxes) in dimension 1-3 with a tensor midpoint rule over cell
  pairs.  Pairs of touching cells are excluded; the ``exclude-and-correct``
  policy replaces the near field by the exact integral of a locally linear
  model of ``u``.
* :func:`lag_integral` handles one-dimensional integrals in the lag
  variable ``h = y - x`` with Gauss panels graded towards ``h = 0`` and
  split at the integrand's breakpoints.  It is the accurate route for
  boundary seminorms on the line.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from .domain import Box
from .errors import (BoundViolation, ConvergenceWarning, DivergentIntegralError, NumericError,
                     ParameterError, PreconditionError)

POLICIES = ("exclude-and-correct", "exclude-only")


@dataclass(frozen=True)
class QuadratureConfig:
    """Cell-pair rule settings.

    ``cells_per_axis`` counts cells along the shortest side of the box; the
    other axes get the same cell width.  Each refinement level doubles it.
    """

    cells_per_axis: int = 16
    diagonal_policy: str = "exclude-and-correct"
    refinement_levels: int = 2
    parallel_chunk: int = 128
    rel_tolerance: float = 1e-2

    def __post_init__(self):
        if int(self.cells_per_axis) != self.cells_per_axis or self.cells_per_axis < 8:
            raise ParameterError("cells_per_axis must be an integer >= 8")
        if int(self.refinement_levels) != self.refinement_levels or self.refinement_levels < 1:
            raise ParameterError("refinement_levels must be an integer >= 1")
        if self.diagonal_policy not in POLICIES:
            raise ParameterError(f"diagonal_policy must be one of {POLICIES}")
        if self.parallel_chunk < 1:
            raise ParameterError("parallel_chunk must be positive")

    def to_dict(self) -> dict:
        return {"cells_per_axis": self.cells_per_axis, "diagonal_policy": self.diagonal_policy,
                "refinement_levels": self.refinement_levels,
                "parallel_chunk": self.parallel_chunk, "rel_tolerance": self.rel_tolerance}


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    refinement_delta: float
    tail_bound: float = 0.0
    levels: tuple = field(default=())

    @property
    def relative_delta(self) -> float:
        return self.refinement_delta / max(abs(self.value), 1e-3)

    def converged(self, rel_tolerance: float = 1e-2) -> bool:
        return self.relative_delta < rel_tolerance

    def scaled(self, factor: float) -> "IntegralEstimate":
        return IntegralEstimate(self.value * factor, self.refinement_delta * abs(factor),
                                self.tail_bound * abs(factor),
                                tuple(v * factor for v in self.levels))

    def with_tail(self, tail: float) -> "IntegralEstimate":
        return IntegralEstimate(self.value, self.refinement_delta, tail, self.levels)


def estimate_from_levels(levels, tail_bound: float = 0.0,
                         rel_tolerance: float = 1e-2, label: str = "integral") -> IntegralEstimate:
    levels = tuple(float(v) for v in levels)
    delta = abs(levels[-1] - levels[-2]) if len(levels) > 1 else 0.0
    est = IntegralEstimate(levels[-1], delta, tail_bound, levels)
    if len(levels) > 1 and not est.converged(rel_tolerance):
        warnings.warn(f"{label}: relative refinement change {est.relative_delta:.3g} "
                      f"exceeds {rel_tolerance:g}", ConvergenceWarning, stacklevel=3)
    return est


def thread_count() -> int:
    env = os.environ.get("FRACSTRIP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"FRACSTRIP_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def pairwise_sum(values, axis: int = -1) -> np.ndarray:
    """Cascade summation along ``axis`` in a fixed binary-tree order.

    The result depends only on the values and their order, never on how the
    caller chunked the work.
    """
    a = np.moveaxis(np.asarray(values, float), axis, -1)
    n = a.shape[-1]
    if n == 0:
        return np.zeros(a.shape[:-1])
    size = 1 << (n - 1).bit_length()
    if size != n:
        a = np.concatenate([a, np.zeros(a.shape[:-1] + (size - n,))], axis=-1)
    while a.shape[-1] > 1:
        half = a.shape[-1] // 2
        a = a[..., :half] + a[..., half:]
    return a[..., 0]


# ---------------------------------------------------------------------------
# Gauss rules


@lru_cache(maxsize=None)
def _legendre(order: int):
    return leggauss(order)


@lru_cache(maxsize=None)
def _jacobi(order: int, beta: float):
    # weight (1 + x)^beta on [-1, 1]
    return special.roots_jacobi(order, 0.0, beta)


def gauss_panels(edges, order: int):
    """Nodes and weights of composite Gauss-Legendre on consecutive ``edges``."""
    edges = np.asarray(edges, float)
    t, w = _legendre(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    keep = half > 0
    nodes = (mid[keep, None] + half[keep, None] * t).reshape(-1)
    weights = (half[keep, None] * w).reshape(-1)
    return nodes, weights


# ---------------------------------------------------------------------------
# near-field model integrals for the cell-pair rule


def _sphere_rule(d: int):
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    if d == 2:
        n = 720
        th = 2 * np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(th), np.sin(th)], axis=-1), np.full(n, 2 * np.pi / n)
    z, wz = _legendre(24)
    nphi = 48
    ph = 2 * np.pi * (np.arange(nphi) + 0.5) / nphi
    zz, pp = np.meshgrid(z, ph, indexing="ij")
    rho = np.sqrt(1 - zz ** 2)
    rays = np.stack([rho * np.cos(pp), rho * np.sin(pp), zz], axis=-1).reshape(-1, 3)
    weights = (wz[:, None] * np.full(nphi, 2 * np.pi / nphi)).reshape(-1)
    return rays, weights


def near_reach(d: int) -> int:
    return {1: 4, 2: 2, 3: 1}[d]


@lru_cache(maxsize=64)
def near_field_table(d: int, p: float, lam: float, reach: int):
    """Radial moments of the cell-pair overlap density.

    For a lag offset ``k`` (in cell units) the pair of cells ``C_i, C_{i+k}``
    has difference density ``prod_a tri(t_a - k_a)``.  Returns
    ``(offsets, rays, ray_weights, G)`` with
    ``G[k, j] = int_0^inf T_k(r w_j) r^(p - lam + d - 1) dr`` so that the
    exact model integral for a unit gradient direction ``e`` is
    ``sum_j ray_weights[j] * G[k, j] * |e . w_j|^p``.
    """
    beta = p - lam + d - 1.0
    if beta <= -1.0:
        raise DivergentIntegralError(
            f"kernel exponent {lam:g} too strong for p = {p:g} in dimension {d}")
    rays, ray_w = _sphere_rule(d)
    rng = range(-reach, reach + 1)
    offsets = np.array(np.meshgrid(*([list(rng)] * d), indexing="ij")).reshape(d, -1).T
    xj, wj = _jacobi(12, beta)
    xl, wl = _legendre(12)
    r_cap = math.sqrt(d) * (reach + 1) + 1.0
    G = np.zeros((len(offsets), len(rays)))
    with np.errstate(divide="ignore", invalid="ignore"):
        for n, k in enumerate(offsets):
            cands = [np.zeros(len(rays))]
            for a in range(d):
                om = rays[:, a]
                for c in (-1.0, 0.0, 1.0):
                    cands.append(np.where(np.abs(om) > 1e-14, (k[a] + c) / om, r_cap))
            pts = np.sort(np.clip(np.stack(cands, axis=-1), 0.0, r_cap), axis=-1)
            total = np.zeros(len(rays))
            for left, right in zip(pts[:, :-1].T, pts[:, 1:].T):
                length = right - left
                # singular Gauss-Jacobi rule on segments starting at the origin
                rj = right[:, None] * (1 + xj) / 2
                wjac = (right[:, None] / 2) ** (beta + 1) * wj
                rl = 0.5 * (left + right)[:, None] + 0.5 * length[:, None] * xl
                wleg = 0.5 * length[:, None] * wl * np.where(rl > 0, rl, 1.0) ** beta
                at_origin = (left == 0)[:, None]
                r = np.where(at_origin, rj, rl)
                w = np.where(at_origin, wjac, wleg)
                t = r[..., None] * rays[:, None, :]
                T = np.prod(np.maximum(0.0, 1.0 - np.abs(t - k)), axis=-1)
                total += np.where(length > 0, np.sum(w * T, axis=-1), 0.0)
            G[n] = total
    return offsets, rays, ray_w, G


# ---------------------------------------------------------------------------
# cell-pair rule


def _grid(box: Box, n: int):
    widths = box.widths
    h = float(np.min(widths)) / n
    counts = np.maximum(1, np.ceil(widths / h - 1e-9).astype(int))
    axes = [lo + h * (np.arange(m) + 0.5) for lo, m in zip(box.lo, counts)]
    idx = np.stack(np.meshgrid(*[np.arange(m) for m in counts], indexing="ij"),
                   axis=-1).reshape(-1, box.dim)
    centers = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, box.dim)
    return h, counts, idx, centers


def _gradient(u: Callable, X: np.ndarray, step: float) -> np.ndarray:
    grads = []
    for a in range(X.shape[-1]):
        e = np.zeros(X.shape[-1])
        e[a] = step
        grads.append((np.asarray(u(X + e), float) - np.asarray(u(X - e), float)) / (2 * step))
    return np.stack(grads, axis=-1)


def _cell_pass(u, box, p, lam, n, policy, inside, pair_weight, chunk, threads):
    d = box.dim
    h, counts, idx, centers = _grid(box, n)
    valid = np.all(centers < np.asarray(box.hi), axis=-1)
    if inside is not None:
        valid &= np.asarray(inside(centers), bool)
    X, I = centers[valid], idx[valid]
    U = np.asarray(u(X), float)
    bad = ~np.isfinite(U)
    if bad.any():
        raise NumericError(f"non-finite integrand at cell center {X[np.argmax(bad)].tolist()}")
    if len(X) == 0:
        return 0.0

    def rows(start):
        stop = min(start + chunk, len(X))
        dist2 = np.zeros((stop - start, len(X)))
        for a in range(d):
            dist2 += (X[start:stop, a, None] - X[None, :, a]) ** 2
        du = np.abs(U[start:stop, None] - U[None, :])
        num = du * du if p == 2 else du ** p
        # self pairs have num == 0; the floor keeps the power finite
        vals = num * np.maximum(dist2, 0.25 * h * h) ** (-0.5 * lam)
        if pair_weight is not None:
            vals = vals * pair_weight(X[start:stop, None, :], X[None, :, :])
        return pairwise_sum(vals, axis=-1)

    starts = range(0, len(X), chunk)
    if threads > 1 and len(X) > chunk:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            row_sums = list(pool.map(rows, starts))
    else:
        row_sums = [rows(st) for st in starts]
    total = float(pairwise_sum(np.concatenate(row_sums)))
    total -= _touching_pairs(X, I, U, counts, h, p, lam, pair_weight)
    total *= h ** (2 * d)

    if policy == "exclude-and-correct":
        total += _near_correction(u, X, I, counts, valid, h, p, lam, pair_weight)
    return total


def _neighbors(I, counts, lookup, k):
    nb = I + k
    inb = np.all((nb >= 0) & (nb < counts), axis=-1)
    j = np.full(len(I), -1)
    j[inb] = lookup[tuple(nb[inb].T)]
    return j


def _lookup(I, counts):
    table = np.full(tuple(counts), -1, dtype=np.int64)
    table[tuple(I.T)] = np.arange(len(I))
    return table


def _touching_pairs(X, I, U, counts, h, p, lam, pair_weight) -> float:
    """Midpoint sum over ordered pairs of distinct touching cells (unscaled)."""
    d = X.shape[-1]
    lookup = _lookup(I, counts)
    acc = np.zeros(len(X))
    for k in np.array(np.meshgrid(*([[-1, 0, 1]] * d), indexing="ij")).reshape(d, -1).T:
        if not k.any():
            continue
        j = _neighbors(I, counts, lookup, k)
        ok = j >= 0
        vals = np.zeros(len(X))
        dist2 = np.sum((X[ok] - X[j[ok]]) ** 2, axis=-1)
        vals[ok] = np.abs(U[ok] - U[j[ok]]) ** p * dist2 ** (-0.5 * lam)
        if pair_weight is not None:
            vals[ok] *= pair_weight(X[ok], X[j[ok]])
        acc += vals
    return float(pairwise_sum(acc))


def _near_correction(u, X, I, counts, valid, h, p, lam, pair_weight) -> float:
    d = X.shape[-1]
    offsets, rays, ray_w, G = near_field_table(d, float(p), float(lam), near_reach(d))
    grad = _gradient(u, X, h * 1e-3)
    gnorm = np.linalg.norm(grad, axis=-1)
    ghat = grad / np.where(gnorm > 0, gnorm, 1.0)[:, None]
    proj = np.abs(ghat @ rays.T) ** p
    exact_all = gnorm[:, None] ** p * (proj @ (ray_w * G).T)
    lookup = _lookup(I, counts)
    corr = np.zeros(len(X))
    for n, k in enumerate(offsets):
        j = _neighbors(I, counts, lookup, k)
        ok = j >= 0
        if not ok.any():
            continue
        exact = exact_all[:, n]
        if np.max(np.abs(k)) > 1:
            kn = float(np.linalg.norm(k))
            exact = exact - np.abs(grad @ k) ** p * kn ** (-lam)
        if pair_weight is not None:
            w = np.zeros(len(X))
            w[ok] = pair_weight(X[ok], X[ok] + h * k)
            exact = exact * w
        corr += np.where(ok, exact, 0.0)
    return float(pairwise_sum(corr)) * h ** (2 * d + p - lam)


def double_integral_singular(u: Callable, box: Box, p: float, kernel_exponent: float,
                             config: QuadratureConfig | None = None, *,
                             inside: Callable | None = None,
                             pair_weight: Callable | None = None,
                             label: str = "double integral") -> IntegralEstimate:
    """Integrate ``w(x,y) |u(x)-u(y)|^p |x-y|^(-kernel_exponent)`` over ``D x D``.

    ``D`` is ``box`` intersected with ``inside`` (cell-center test).  ``u``
    maps points with trailing axis ``d`` to values.  The returned estimate
    holds the value at the finest level and the change from the previous
    level.
    """
    config = config or QuadratureConfig()
    d = box.dim
    if d not in (1, 2, 3):
        raise ParameterError("cell-pair quadrature supports dimensions 1 to 3")
    if kernel_exponent >= d + p:
        raise DivergentIntegralError(
            f"kernel exponent {kernel_exponent:g} >= dim + p = {d + p:g}: not integrable "
            "for Lipschitz data")
    threads = thread_count()
    levels = []
    for level in range(config.refinement_levels):
        n = config.cells_per_axis * 2 ** level
        levels.append(_cell_pass(u, box, p, kernel_exponent, n, config.diagonal_policy,
                                 inside, pair_weight, config.parallel_chunk, threads))
    return estimate_from_levels(levels, rel_tolerance=config.rel_tolerance, label=label)


# ---------------------------------------------------------------------------
# lag-variable route on the line


@dataclass(frozen=True)
class LagRule:
    """Resolution controls for :func:`lag_integral`.

    ``scale`` is the panel width in the resolved core ``[-core, core]``;
    beyond the core panels grow geometrically.  ``order`` is the Gauss
    order per panel and ``levels`` the number of dyadic panels graded
    towards ``h = 0``.
    """

    scale: float = 0.25
    core: float | None = None
    order: int = 8
    levels: int = 36
    growth: float = 1.25

    def refined(self) -> "LagRule":
        return LagRule(self.scale / 2, self.core, self.order + 4, self.levels + 8, self.growth)


def _axis_edges(lo: float, hi: float, rule: LagRule, anchors=()) -> np.ndarray:
    core = rule.core
    pts = [lo, hi, *[a for a in anchors if lo < a < hi]]
    if core is None or (lo >= -core and hi <= core):
        n = max(1, int(math.ceil((hi - lo) / rule.scale)))
        pts.extend(np.linspace(lo, hi, n + 1))
        return np.unique(np.asarray(pts))
    c_lo, c_hi = max(lo, -core), min(hi, core)
    if c_hi > c_lo:
        n = max(1, int(math.ceil((c_hi - c_lo) / rule.scale)))
        pts.extend(np.linspace(c_lo, c_hi, n + 1))
    for sign, limit in ((1.0, hi), (-1.0, -lo)):
        x, step = core, rule.scale
        while x < limit:
            pts.append(sign * x)
            step *= rule.growth
            x += step
    return np.unique(np.clip(np.asarray(pts), lo, hi))


def _lag_edges(start: float, stop: float, rule: LagRule, splits, graded: bool) -> np.ndarray:
    """Panel edges for ``h`` on ``[start, stop]`` (both non-negative)."""
    edges = {start, stop}
    for s in splits:
        if start < s < stop:
            edges.add(float(s))
    if graded:
        first = min([e for e in edges if e > start] + [rule.scale])
        for j in range(rule.levels):
            edges.add(first * 2.0 ** (-j))
        body_start = first
    else:
        body_start = start
    if stop > body_start:
        core_stop = min(stop, 16 * rule.scale if rule.core is None else max(rule.core, 16 * rule.scale))
        if core_stop > body_start:
            n = max(1, int(math.ceil((core_stop - body_start) / rule.scale)))
            edges.update(np.linspace(body_start, core_stop, n + 1).tolist())
        x, step = core_stop, rule.scale
        while x < stop:
            edges.add(x)
            step *= rule.growth
            x += step
    return np.array(sorted(e for e in edges if start <= e <= stop))


def lag_integral(g: Callable, lo: float, hi: float, p: float, exponent: float, *,
                 region: str = "all", screen=None, weighted: bool = False,
                 extra_weight: Callable | None = None, breakpoints=(),
                 rule: LagRule | None = None) -> np.ndarray:
    """``int int W |g(y) - g(x)|^p |y - x|^(-exponent) dy dx`` over ``[lo, hi]^2``.

    ``g`` maps a 1-D array of abscissae to values of shape ``(..., n)``;
    leading axes are carried through as a batch.  ``region`` is ``"all"``,
    ``"near"`` (``|y - x| < screen(x)``) or ``"far"`` (``|y - x| >=
    screen(x)``); ``weighted`` multiplies far pairs by
    ``screen(x) * screen(y)``.  ``extra_weight(x, h)`` multiplies the
    integrand.  ``breakpoints`` are abscissae where ``g`` may jump or kink.
    """
    rule = rule or LagRule()
    if region not in ("all", "near", "far"):
        raise ParameterError(f"unknown region '{region}'")
    width = hi - lo
    if region != "all" and screen is None:
        raise ParameterError("screened regions need a screen")
    const_screen = screen is None or not callable(screen)
    if region == "all":
        r_min = r_max = width
    elif const_screen:
        r_min = r_max = float(screen)
    else:
        probe = np.linspace(lo, hi, 4001)
        rv = np.asarray(screen(probe), float)
        r_min, r_max = float(rv.min()), float(rv.max())
    if region != "all" and r_min <= 0:
        from .errors import DomainError
        raise DomainError("screen must be positive")

    def screen_at(x):
        return np.full(x.shape, float(screen)) if const_screen else np.asarray(screen(x), float)

    splits = [r_min, r_max]
    if r_max > r_min:
        splits.extend(np.linspace(r_min, r_max, 17)[1:-1])
    if region == "near":
        h_edges = _lag_edges(0.0, min(r_max, width), rule, splits, graded=True)
    elif region == "far":
        if r_min >= width:
            h_edges = np.array([])
        else:
            h_edges = _lag_edges(r_min, width, rule, splits, graded=False)
    else:
        h_edges = _lag_edges(0.0, width, rule, splits, graded=True)
    if len(h_edges) < 2:
        return np.zeros(np.shape(g(np.array([lo])))[:-1])
    h_nodes, h_w = gauss_panels(h_edges, rule.order)
    h_w = h_w * h_nodes ** (-exponent)

    x_edges = _axis_edges(lo, hi, rule, anchors=breakpoints)
    bps = np.asarray(breakpoints, float)
    symmetric = (const_screen or region == "all") and extra_weight is None
    total = None
    for sign in ((1.0,) if symmetric else (1.0, -1.0)):
        for h, wh in zip(h_nodes, h_w):
            hs = sign * h
            a, b = lo + max(0.0, -hs), hi - max(0.0, hs)
            if b <= a:
                continue
            inner = x_edges[(x_edges > a) & (x_edges < b)]
            extra = np.concatenate([bps, bps - hs])
            extra = extra[(extra > a) & (extra < b)]
            edges = np.unique(np.concatenate([[a, b], inner, extra]))
            x, wx = gauss_panels(edges, rule.order)
            diff = np.abs(np.asarray(g(x + hs), float) - np.asarray(g(x), float)) ** p
            weight = wx
            if region != "all":
                rx = screen_at(x)
                if not const_screen:
                    mask = (h < rx) if region == "near" else (h >= rx)
                    weight = weight * mask
                if region == "far" and weighted:
                    weight = weight * rx * screen_at(x + hs)
            if extra_weight is not None:
                weight = weight * extra_weight(x, hs)
            contrib = wh * pairwise_sum(diff * weight, axis=-1)
            total = contrib if total is None else total + contrib
    if total is None:
        return np.zeros(np.shape(g(np.array([lo])))[:-1])
    return total * (2.0 if symmetric else 1.0)


# ---------------------------------------------------------------------------
# slicing kernels


def slicing_plane_kernel(lam: float, gap: float, N: int) -> float:
    """``int_{R^{N-1}} (|x'|^2 + gap^2)^(-lam/2) dx'`` by radial quadrature.

    The radial integral is cut at ``1e4 * gap``; the remaining tail is added
    from its leading power-law term.
    """
    if N < 2:
        raise ParameterError("plane kernel needs N >= 2")
    if not lam > N - 1:
        raise DivergentIntegralError(f"plane kernel diverges for lam = {lam:g} <= N - 1")
    if not gap > 0:
        raise PreconditionError("gap must be positive")
    sphere = 2 * math.pi ** ((N - 1) / 2) / math.gamma((N - 1) / 2)
    cut = 1e4 * gap
    f = lambda r: r ** (N - 2) * (r * r + gap * gap) ** (-lam / 2)
    pieces = [0.0, gap, 10 * gap, 100 * gap, 1000 * gap, cut]
    body = math.fsum(integrate.quad(f, a, b, limit=200)[0] for a, b in zip(pieces, pieces[1:]))
    tail = cut ** (N - 1 - lam) / (lam - N + 1)
    return sphere * (body + tail)


@lru_cache(maxsize=None)
def plane_kernel_constant(lam: float, N: int) -> float:
    """``C(lam, N)`` with ``slicing_plane_kernel = C * gap^-(lam - N + 1)``."""
    return slicing_plane_kernel(lam, 1.0, N)


def check_plane_kernel(lam: float, N: int, gaps, rel_tol: float = 1e-2) -> list:
    """Verify the two-sided power-law bound at each gap; raises on violation."""
    c = plane_kernel_constant(lam, N)
    rows = []
    for gap in gaps:
        v = slicing_plane_kernel(lam, gap, N)
        scale = gap ** (-(lam - N + 1))
        lower, upper = (1 - rel_tol) * c * scale, (1 + rel_tol) * c * scale
        rows.append({"gap": gap, "value": v, "lower": lower, "upper": upper,
                     "pass": lower <= v <= upper})
    bad = [r for r in rows if not r["pass"]]
    if bad:
        raise BoundViolation("plane kernel bound violated", bad)
    return rows


def finite_kernel_constants(lam: float, k: float) -> tuple[float, float]:
    """``(C1, C2)`` bracketing ``rho^(lam-1) * int_0^r dx / (rho^lam + |x-y|^lam)``."""
    c2 = 2 * (math.pi / lam) / math.sin(math.pi / lam)
    c1 = integrate.quad(lambda t: 1.0 / (1.0 + t ** lam), 0.0, 1.0 / (2 * k))[0]
    return c1, c2


def slicing_finite_kernel(lam: float, rho: float, r: float, y: float, k: float,
                          check: bool = True) -> float:
    """``int_0^r dx / (rho^lam + |x - y|^lam)``, optionally checked against its bounds."""
    if not lam > 1:
        raise ParameterError("finite kernel needs lam > 1")
    if not 0 < y < r:
        raise PreconditionError(f"y = {y:g} must lie in (0, r = {r:g})")
    if not 0 < rho <= k * r:
        raise PreconditionError("need 0 < rho <= k * r")
    f = lambda x: 1.0 / (rho ** lam + abs(x - y) ** lam)
    value = sum(integrate.quad(f, a, b, limit=200, points=[a + (b - a) / 2])[0]
                for a, b in ((0.0, y), (y, r)))
    if check:
        c1, c2 = finite_kernel_constants(lam, k)
        lo, hi = c1 / rho ** (lam - 1), c2 / rho ** (lam - 1)
        if not lo * (1 - 1e-9) <= value <= hi * (1 + 1e-9):
            raise BoundViolation(f"finite kernel {value:g} outside [{lo:g}, {hi:g}]",
                                 [{"lam": lam, "rho": rho, "r": r, "y": y, "k": k}])
    return value
