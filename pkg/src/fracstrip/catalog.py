"""Built-in analytic test functions.

Boundary entries take points with a trailing coordinate axis of length
``N - 1``; bulk entries take points with trailing axis ``N`` where the last
coordinate is the height ``x_N``.  Each entry carries its smoothness class,
a decay envelope used for truncation tail estimates, the abscissae where it
jumps or kinks, resolution hints for the quadrature, and closed-form
seminorm values where known.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CatalogLookupError, ParameterError


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    evaluator: Callable
    domain_tag: str
    smoothness: str
    decay: str
    envelope: Callable
    limits: tuple = (0.0, 0.0)
    breakpoints: tuple = ()
    scale: float = 0.25
    core: float | None = None
    closed_forms: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        return np.asarray(self.evaluator(pts), float) * np.ones(pts.shape[:-1])

    def on_line(self, x) -> np.ndarray:
        """Evaluate a boundary entry at scalar abscissae (N - 1 = 1)."""
        return self(np.asarray(x, float)[..., None])

    def limit_at(self, x1) -> np.ndarray:
        x1 = np.asarray(x1, float)
        return np.where(x1 < 0, self.limits[0], self.limits[1])

    def check_decay(self, radius: float = 4.0, samples: int = 2001, dim: int = 1) -> bool:
        """Ratio test: sampled tail deviations never exceed the envelope."""
        r = np.linspace(radius, 8 * radius, samples)
        total = True
        for sign in (-1.0, 1.0):
            pts = np.zeros((samples, dim))
            pts[:, 0] = sign * r
            if self.domain_tag == "bulk":
                pts = np.concatenate([pts, np.full((samples, 1), 0.5)], axis=-1)
            dev = np.abs(self(pts) - self.limit_at(sign * r))
            env = np.asarray([self.envelope(v) for v in r])
            total &= bool(np.all(dev <= env * (1 + 1e-9) + 1e-300))
        return total

    def describe(self) -> dict:
        return {"name": self.name, "domain": self.domain_tag, "smoothness": self.smoothness,
                "decay": self.decay, "params": dict(self.params),
                "closed_forms": sorted(self.closed_forms)}

    def scaled(self, c: float) -> "CatalogEntry":
        ev = self.evaluator
        return _replace(self, name=f"{c:g}*{self.name}",
                        evaluator=lambda x: c * np.asarray(ev(x), float),
                        envelope=lambda r, env=self.envelope: abs(c) * env(r),
                        limits=(c * self.limits[0], c * self.limits[1]))

    def shifted(self, offset: float) -> "CatalogEntry":
        """Translate along the first coordinate: ``x -> g(x - offset)``."""
        ev = self.evaluator

        def moved(x):
            y = np.array(x, float, copy=True)
            y[..., 0] -= offset
            return ev(y)

        return _replace(self, name=f"{self.name}@{offset:g}", evaluator=moved,
                        envelope=lambda r, env=self.envelope: env(max(r - abs(offset), 0.0)),
                        breakpoints=tuple(b + offset for b in self.breakpoints),
                        core=None if self.core is None else self.core + abs(offset))


def _replace(entry: CatalogEntry, **changes) -> CatalogEntry:
    from dataclasses import replace

    return replace(entry, **changes)


def _sq(x):
    return np.sum(x * x, axis=-1)


def _unit_interval_power(a: float):
    """Gagliardo seminorm of ``a * x`` on (0, 1): ``|a|^p * 2 / ((p - sp)(p - sp + 1))``."""
    def form(s, p):
        q = p - s * p
        return abs(a) ** p * 2.0 / (q * (q + 1.0))
    return form


def _gaussian_tail(a, w):
    return lambda r: abs(a) * math.exp(-(r / w) ** 2)


def _boundary_entries():
    def constant(c=1.0):
        c = float(c)
        zero = lambda s, p: 0.0
        return CatalogEntry("constant", lambda x: np.full(x.shape[:-1], c), "boundary",
                            "C-infinity", "none", lambda r: 0.0, (c, c),
                            closed_forms={"gagliardo_unit_interval": zero, "close_screen1": zero,
                                          "far_screen1": zero}, params={"c": c})

    def affine(a=1.0, c=0.0):
        a, c = float(a), float(c)
        return CatalogEntry("affine", lambda x: a * x[..., 0] + c, "boundary", "C-infinity",
                            "growing", lambda r: math.inf, (-math.inf, math.inf),
                            closed_forms={"gagliardo_unit_interval": _unit_interval_power(a)},
                            params={"a": a, "c": c})

    def gaussian(amplitude=1.0, width=1.0, center=0.0):
        a, w, c = float(amplitude), float(width), float(center)
        if w <= 0:
            raise ParameterError("gaussian width must be positive")
        return CatalogEntry(
            "gaussian", lambda x: a * np.exp(-((x[..., 0] - c) ** 2 + _sq(x[..., 1:])) / w ** 2),
            "boundary", "C-infinity", "gaussian",
            lambda r: abs(a) * math.exp(-(max(r - abs(c), 0.0) / w) ** 2),
            scale=min(0.25, w / 4), core=max(4 * w + abs(c), 2.0),
            params={"amplitude": a, "width": w, "center": c})

    def bump(amplitude=1.0, radius=1.0):
        a, rad = float(amplitude), float(radius)

        def ev(x):
            t = _sq(x) / rad ** 2
            inside = t < 1
            return a * np.where(inside, np.exp(-1.0 / np.where(inside, 1 - t, 1.0)), 0.0)

        return CatalogEntry("bump", ev, "boundary", "C-infinity (compact)", "compact",
                            lambda r: 0.0 if r >= rad else abs(a), scale=min(0.25, rad / 8),
                            core=rad + 1.0, params={"amplitude": a, "radius": rad})

    def heaviside():
        def close1(s, p):
            sp = s * p
            return (2.0 / (sp - 1.0)) * (1.0 / (2.0 - sp) - 1.0)

        def far1(s, p):
            sp = s * p
            return (2.0 / (1.0 + sp)) * (1.0 + 1.0 / sp)

        return CatalogEntry("heaviside", lambda x: (x[..., 0] >= 0).astype(float), "boundary",
                            "jump at 0", "step", lambda r: 0.0, (0.0, 1.0), breakpoints=(0.0,),
                            core=4.0, closed_forms={"close_screen1": close1, "far_screen1": far1})

    def powerlaw_clamp(lam=0.5):
        lam = float(lam)
        if not 0 < lam < 1:
            raise ParameterError("powerlaw_clamp needs 0 < lam < 1")

        def ev(x):
            t = x[..., 0]
            return np.maximum(1.0, np.where(t > 1, t, 1.0) ** lam)

        return CatalogEntry("powerlaw_clamp", ev, "boundary", "Lipschitz (kink at 1)", "growing",
                            lambda r: math.inf, (1.0, math.inf), breakpoints=(1.0,), core=8.0,
                            params={"lam": lam})

    def sine_packet(frequency=1.0, width=2.0, amplitude=1.0):
        f, w, a = float(frequency), float(width), float(amplitude)
        return CatalogEntry(
            "sine_packet",
            lambda x: a * np.sin(2 * np.pi * f * x[..., 0]) * np.exp(-_sq(x) / w ** 2),
            "boundary", "C-infinity", "gaussian", _gaussian_tail(a, w),
            scale=min(0.25, 1.0 / (8 * max(f, 1e-9)), w / 4), core=4 * w,
            params={"frequency": f, "width": w, "amplitude": a})

    def bandlimited(seed=0, bins=32, base=0.125, width=4.0):
        seed, bins = int(seed), int(bins)
        base, width = float(base), float(width)
        rng = np.random.default_rng(seed)
        coef = rng.standard_normal(bins)
        phase = rng.uniform(0, 2 * np.pi, bins)
        freqs = base * np.arange(1, bins + 1)
        total = float(np.sum(np.abs(coef)))

        def ev(x):
            t = x[..., 0]
            waves = np.cos(2 * np.pi * freqs * t[..., None] + phase) @ coef
            return waves * np.exp(-np.pi * t ** 2 / width ** 2)

        return CatalogEntry("bandlimited", ev, "boundary", "C-infinity", "gaussian",
                            lambda r: total * math.exp(-math.pi * r ** 2 / width ** 2),
                            scale=1.0 / (4 * freqs[-1]), core=2.5 * width,
                            params={"seed": seed, "bins": bins, "base": base, "width": width})

    def selfdual():
        return CatalogEntry("selfdual", lambda x: np.exp(-np.pi * _sq(x)), "boundary",
                            "C-infinity", "gaussian", lambda r: math.exp(-math.pi * r * r),
                            scale=0.125, core=3.0)

    return {"constant": constant, "affine": affine, "gaussian": gaussian, "bump": bump,
            "heaviside": heaviside, "powerlaw_clamp": powerlaw_clamp,
            "sine_packet": sine_packet, "bandlimited": bandlimited, "selfdual": selfdual}


def _bulk_entries():
    def bulk_constant(c=1.0):
        c = float(c)
        return CatalogEntry("bulk_constant", lambda x: np.full(x.shape[:-1], c), "bulk",
                            "C-infinity", "none", lambda r: 0.0, (c, c), params={"c": c})

    def bulk_xn():
        # vertical slices on (0, 1) carry the unit-interval closed form per unit width
        return CatalogEntry("bulk_xn", lambda x: x[..., -1], "bulk", "C-infinity", "none",
                            lambda r: 0.0, closed_forms={"slice_vertical_per_width":
                                                         _unit_interval_power(1.0)})

    def bulk_bump(width=1.0, center=0.5):
        w, c = float(width), float(center)
        return CatalogEntry(
            "bulk_bump", lambda x: np.exp(-(_sq(x[..., :-1]) + (x[..., -1] - c) ** 2) / w ** 2),
            "bulk", "C-infinity", "gaussian", _gaussian_tail(1.0, w),
            params={"width": w, "center": c})

    def bulk_separable(width=1.0, frequency=1.0):
        w, f = float(width), float(frequency)
        return CatalogEntry(
            "bulk_separable",
            lambda x: np.exp(-_sq(x[..., :-1]) / w ** 2) * np.cos(f * x[..., -1]),
            "bulk", "C-infinity", "gaussian", _gaussian_tail(1.0, w),
            params={"width": w, "frequency": f})

    def bulk_trace(width=1.0):
        w = float(width)
        return CatalogEntry("bulk_trace", lambda x: np.exp(-_sq(x[..., :-1]) / w ** 2), "bulk",
                            "C-infinity", "gaussian", _gaussian_tail(1.0, w),
                            params={"width": w})

    def bulk_wave(frequency=1.0, width=2.0):
        f, w = float(frequency), float(width)
        return CatalogEntry(
            "bulk_wave",
            lambda x: np.sin(2 * f * x[..., 0] + x[..., -1]) * np.exp(-_sq(x[..., :-1]) / w ** 2),
            "bulk", "C-infinity", "gaussian", _gaussian_tail(1.0, w),
            params={"frequency": f, "width": w})

    def bulk_ramp(width=1.0):
        w = float(width)
        return CatalogEntry(
            "bulk_ramp", lambda x: x[..., -1] ** 2 * np.exp(-_sq(x[..., :-1]) / w ** 2),
            "bulk", "C-infinity", "gaussian", _gaussian_tail(4.0, w), params={"width": w})

    return {"bulk_constant": bulk_constant, "bulk_xn": bulk_xn, "bulk_bump": bulk_bump,
            "bulk_separable": bulk_separable, "bulk_trace": bulk_trace,
            "bulk_wave": bulk_wave, "bulk_ramp": bulk_ramp}


_REGISTRY = {**_boundary_entries(), **_bulk_entries()}

# catalog families used by the verification suites
BOUNDARY_SMOOTH = ("gaussian", "bump", "sine_packet", "selfdual")
BOUNDARY_ALL = ("constant", "gaussian", "bump", "heaviside", "sine_packet", "selfdual",
                "bandlimited")
BULK_FAMILY = ("bulk_bump", "bulk_xn", "bulk_separable", "bulk_trace", "bulk_wave", "bulk_ramp")

# shared between the CLI and the test-suite
ALIASES = {"compact_bump": "bump", "chi": "heaviside", "x_N": "bulk_xn", "bump2d": "bulk_bump"}


def get(name: str, **params) -> CatalogEntry:
    """Look up a catalog entry by name, forwarding keyword parameters."""
    key = ALIASES.get(name, name)
    try:
        factory = _REGISTRY[key]
    except KeyError:
        raise CatalogLookupError(f"unknown catalog function '{name}'") from None
    if "λ" in params:
        params["lam"] = params.pop("λ")
    try:
        return factory(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for '{name}': {exc}") from None


def names(domain_tag: str | None = None) -> list[str]:
    out = []
    for key in _REGISTRY:
        if domain_tag is None or get(key).domain_tag == domain_tag:
            out.append(key)
    return out


def listing() -> list[dict]:
    return [get(key).describe() for key in _REGISTRY]
