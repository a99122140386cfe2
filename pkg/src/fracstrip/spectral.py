"""Fourier description of the screened spaces for p = 2 on the real line.

Transform convention: ``g_hat(xi) = int g(x) exp(-2 pi i x xi) dx``.  The
weighted spectral integral uses ``xi^2`` below ``|xi| = 1/2`` and
``|xi|^(2s-1)`` above.  The direct side is the close seminorm (screen 1,
kernel exponent ``2s``) plus the unweighted far seminorm (screen 1, kernel
exponent ``2 + 2s``); by Plancherel that sum equals ``int m(xi) |g_hat|^2``
with the multiplier ``m`` computed here, so every ratio of the two sides lies
between the extreme values of ``m / weight``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .domain import Box, SeminormParams
from .errors import EquivalenceViolation, ParameterError, RegimeError, WindowingWarning
from .quadrature import gauss_panels, pairwise_sum

EDGE_FRACTION = 1 / 64
EDGE_ENERGY_LIMIT = 1e-2


@dataclass(frozen=True)
class SpectralConfig:
    sample_count: int = 4096
    sample_spacing: float = 1 / 32
    window: str = "none"

    def __post_init__(self):
        n = int(self.sample_count)
        if n < 1024 or n & (n - 1):
            raise ParameterError("sample_count must be a power of two and at least 1024")
        if not self.sample_spacing > 0:
            raise ParameterError("sample_spacing must be positive")
        if self.window not in ("none", "raised-cosine"):
            raise ParameterError("window must be 'none' or 'raised-cosine'")

    @property
    def half_width(self) -> float:
        return 0.5 * self.sample_count * self.sample_spacing

    def doubled(self) -> "SpectralConfig":
        return SpectralConfig(2 * self.sample_count, self.sample_spacing, self.window)

    def to_dict(self) -> dict:
        return {"sample_count": self.sample_count, "sample_spacing": self.sample_spacing,
                "window": self.window}


def _check_s(s: float):
    if not 0.5 <= s < 1:
        raise RegimeError(f"spectral characterization needs 1/2 <= s < 1, got s={s}")


def spectral_weight(xi, s: float) -> np.ndarray:
    a = np.abs(np.asarray(xi, float))
    return np.where(a <= 0.5, a * a, a ** (2 * s - 1))


def sample_grid(config: SpectralConfig) -> np.ndarray:
    n, dx = config.sample_count, config.sample_spacing
    return (np.arange(n) - n // 2) * dx


def transform(g: Callable, config: SpectralConfig) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies ``k / (n dx)`` and ``g_hat`` at those frequencies."""
    x = sample_grid(config)
    values = np.asarray(g(x[:, None]), float)
    if config.window == "raised-cosine":
        values = values * _raised_cosine(config.sample_count)
    n, dx = config.sample_count, config.sample_spacing
    edge = max(1, int(n * EDGE_FRACTION))
    total = float(np.sum(values ** 2))
    boundary = float(np.sum(values[:edge] ** 2) + np.sum(values[-edge:] ** 2))
    if total > 0 and boundary > EDGE_ENERGY_LIMIT * total:
        warnings.warn(f"{boundary / total:.3%} of the energy sits in the window edge bins",
                      WindowingWarning, stacklevel=3)
    xi = np.fft.fftfreq(n, dx)
    # the grid starts at -n/2 dx; undo that shift so the phase matches the continuous transform
    g_hat = dx * np.fft.fft(values) * np.exp(2j * np.pi * xi * (n // 2) * dx)
    return xi, g_hat


def _raised_cosine(n: int, taper: float = 0.1) -> np.ndarray:
    t = np.arange(n) / (n - 1)
    w = np.ones(n)
    edge = t < taper / 2
    w[edge] = 0.5 * (1 - np.cos(2 * np.pi * t[edge] / taper))
    edge = t > 1 - taper / 2
    w[edge] = 0.5 * (1 - np.cos(2 * np.pi * (1 - t[edge]) / taper))
    return w


def roundtrip_error(g: Callable, config: SpectralConfig) -> float:
    """Relative error of inverse-transforming the discrete transform."""
    x = sample_grid(config)
    values = np.asarray(g(x[:, None]), float)
    back = np.fft.ifft(np.fft.fft(values)).real
    scale = float(np.max(np.abs(values))) or 1.0
    return float(np.max(np.abs(back - values)) / scale)


def fourier_seminorm(g: Callable, s: float, config: SpectralConfig | None = None) -> float:
    """Riemann sum of ``weight(xi) |g_hat(xi)|^2`` over the discrete frequencies."""
    _check_s(s)
    config = config or SpectralConfig()
    xi, g_hat = transform(g, config)
    d_xi = 1.0 / (config.sample_count * config.sample_spacing)
    return float(pairwise_sum(cell_weight(xi, d_xi, s) * np.abs(g_hat) ** 2) * d_xi)


def cell_weight(xi, d_xi: float, s: float) -> np.ndarray:
    """Weight averaged across the jump at ``|xi| = 1/2`` for the cell around each bin."""
    a = np.abs(np.asarray(xi, float))
    below = np.clip((0.5 - (a - d_xi / 2)) / d_xi, 0.0, 1.0)
    return below * a * a + (1 - below) * a ** (2 * s - 1)


# ---------------------------------------------------------------------------
# multiplier


def _unit_panels(order: int = 24):
    return np.polynomial.legendre.leggauss(order)


def _close_multiplier(xi: float, s: float) -> float:
    """``2 int_0^1 (2 - 2 cos(2 pi xi h)) h^(-2s) dh`` after the substitution ``t = xi h``."""
    if xi == 0:
        return 0.0
    f = lambda t: 4 * math.sin(math.pi * t) ** 2 * t ** (-2 * s)
    head = integrate.quad(f, 0.0, min(1.0, xi), epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    body = 0.0
    if xi > 1:
        edges = np.concatenate([np.arange(1.0, math.floor(xi) + 1.0), [xi]])
        edges = np.unique(edges)
        t, w = gauss_panels(edges, 24)
        body = float(pairwise_sum(w * 4 * np.sin(np.pi * t) ** 2 * t ** (-2 * s)))
    return 2 * xi ** (2 * s - 1) * (head + body)


def _far_multiplier(xi: float, s: float) -> float:
    """``2 int_1^inf (2 - 2 cos(2 pi xi h)) h^(-2-2s) dh``."""
    if xi == 0:
        return 0.0
    k = 2 + 2 * s
    plain = 2.0 / (k - 1)
    osc = integrate.quad(lambda h: h ** (-k), 1.0, np.inf, weight="cos",
                         wvar=2 * math.pi * xi, limlst=200)[0]
    return 2 * (plain - 2 * osc)


@lru_cache(maxsize=4096)
def _multiplier_scalar(xi: float, s: float) -> float:
    return _close_multiplier(xi, s) + _far_multiplier(xi, s)


@dataclass(frozen=True)
class RegimeConstants:
    """Analytic constants for ``c xi^2 <= m(xi) <= C |xi|^(2s)`` on ``|xi| <= 1/2``."""

    lower: float
    upper: float


def regime_constants(s: float) -> RegimeConstants:
    # 1 - cos(theta) >= 2 theta^2 / pi^2 for |theta| <= pi, and 2 - 2 cos(theta) <= theta^2
    lower = 32.0 / (3 - 2 * s)
    if s > 0.5:
        upper = 8 * math.pi ** 2 * (1 / (3 - 2 * s) + 1 / (2 * s - 1)) * 2.0 ** (2 * s - 2)
    else:
        upper = math.inf
    return RegimeConstants(lower, upper)


def multiplier_profile(s: float, xi, check: bool = True) -> np.ndarray:
    """``m(xi) = int min(1, h^2) (2 - 2 cos(2 pi xi h)) / |h|^(2+2s) dh``."""
    _check_s(s)
    xi = np.asarray(xi, float)
    flat = np.abs(xi).ravel()
    m = np.array([_multiplier_scalar(float(v), float(s)) for v in flat]).reshape(xi.shape)
    if check:
        consts = regime_constants(s)
        low = (flat > 0) & (flat <= 0.5)
        mm = m.ravel()
        bad = low & ((mm < consts.lower * flat ** 2 * (1 - 1e-9))
                     | (mm > consts.upper * flat ** (2 * s) * (1 + 1e-9)))
        if np.any(bad):
            raise RegimeError(f"multiplier regime bounds fail at xi={flat[bad].tolist()}")
    return m


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float


def loglog_fit(x, y) -> SlopeFit:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    coef, res, *_ = np.polyfit(lx, ly, 1, full=True)
    rms = math.sqrt(float(res[0]) / len(lx)) if len(res) else 0.0
    return SlopeFit(float(coef[0]), float(coef[1]), rms)


def multiplier_slope(s: float, lo: float = 2.0, hi: float = 64.0, points: int = 25) -> SlopeFit:
    xi = np.geomspace(lo, hi, points)
    return loglog_fit(xi, multiplier_profile(s, xi))


def multiplier_budget(s: float, hi: float = 4096.0) -> tuple[float, float]:
    """Extreme values of ``m / weight`` on a log grid (zero frequency by its limit)."""
    xi = np.concatenate([np.geomspace(1e-3, 0.5, 40), np.geomspace(0.5, hi, 120)[1:]])
    ratio = multiplier_profile(s, xi, check=False) / spectral_weight(xi, s)
    return float(ratio.min()), float(ratio.max())


# ---------------------------------------------------------------------------
# equivalence


def default_family() -> list[tuple[str, Callable]]:
    from . import catalog

    fam = [(f"bandlimited[seed={k}]", catalog.get("bandlimited", seed=k)) for k in range(5)]
    fam += [(f"gaussian[width={w}]", catalog.get("gaussian", width=w)) for w in (0.5, 2.0)]
    return fam


@dataclass
class SpectralEntry:
    name: str
    direct: float
    spectral: float
    spectral_doubled: float

    @property
    def ratio(self) -> float:
        if self.direct == 0 and self.spectral == 0:
            return 1.0
        return self.direct / self.spectral if self.spectral > 0 else math.inf

    @property
    def ratio_doubled(self) -> float:
        if self.direct == 0 and self.spectral_doubled == 0:
            return 1.0
        return self.direct / self.spectral_doubled if self.spectral_doubled > 0 else math.inf

    def to_json(self) -> dict:
        return {"name": self.name, "direct": self.direct, "spectral": self.spectral,
                "spectral_doubled": self.spectral_doubled, "ratio": self.ratio}


@dataclass
class SpectralReport:
    s: float
    entries: list
    budget: float
    multiplier_range: tuple
    config: SpectralConfig
    notes: list = field(default_factory=list)

    def _spread(self, attr) -> float:
        r = [getattr(e, attr) for e in self.entries if e.direct > 0]
        return max(max(r), 1 / min(r)) if r else 1.0

    @property
    def observed_budget(self) -> float:
        return self._spread("ratio")

    @property
    def observed_budget_doubled(self) -> float:
        return self._spread("ratio_doubled")

    @property
    def drift(self) -> float:
        return abs(self.observed_budget_doubled / self.observed_budget - 1)

    @property
    def passes(self) -> bool:
        inside = all(1 / self.budget <= e.ratio <= self.budget for e in self.entries)
        return inside and self.drift < 0.1

    def to_json(self) -> dict:
        return {"s": self.s, "budget": self.budget,
                "multiplier_range": list(self.multiplier_range),
                "observed_budget": self.observed_budget,
                "observed_budget_doubled": self.observed_budget_doubled,
                "drift": self.drift, "pass": self.passes, "config": self.config.to_dict(),
                "entries": [e.to_json() for e in self.entries], "notes": self.notes}


def direct_seminorm(g: Callable, s: float, box: Box | None = None) -> float:
    from .seminorms import close_screened, far_screened

    params = SeminormParams(2, s, 2.0)
    box = box or Box.centered(1, 8.0)
    close = close_screened(g, 1.0, params, box).value_p
    far = far_screened(g, 1.0, params, box, weighted=False).value_p
    return close + far + exterior_pairs(g, s, box)


def _power_integral(lo, hi, k):
    """``int_lo^hi d^-k dd`` elementwise, with ``hi`` possibly infinite."""
    top = np.where(np.isinf(hi), 0.0, np.asarray(hi, float) ** (1 - k))
    return np.where(hi > lo, (lo ** (1 - k) - top) / (k - 1), 0.0)


def exterior_pairs(g: Callable, s: float, box: Box, order: int = 10) -> float:
    """Pairs with one point outside ``box``, taking ``g = 0`` there.

    Equals ``2 int_box g(x)^2 K(x) dx`` where ``K`` integrates the close kernel
    ``d^-2s`` over exterior points within distance 1 and the far kernel
    ``d^-(2+2s)`` over those farther away.
    """
    lo, hi = box.lo[0], box.hi[0]
    n = max(1, int(math.ceil((hi - lo) / 0.125)))
    x, w = gauss_panels(np.linspace(lo, hi, n + 1), order)
    kernel = np.zeros_like(x)
    for gap in (hi - x, x - lo):
        gap = np.maximum(gap, 1e-300)
        kernel += _power_integral(gap, np.maximum(gap, 1.0), 2 * s)
        kernel += _power_integral(np.maximum(gap, 1.0), np.full_like(gap, np.inf), 2 + 2 * s)
    values = np.asarray(g(x[:, None]), float)
    return float(2 * pairwise_sum(w * values ** 2 * kernel))


def equivalence_check_spectral(family: Sequence[tuple[str, Callable]] | None, s: float,
                               config: SpectralConfig | None = None, box: Box | None = None,
                               check: bool = False) -> SpectralReport:
    """Ratios of direct to spectral seminorms for each family member.

    The budget is ``max(sup m/weight, 1/inf m/weight)``; the observed spread
    must also move by less than 10% when ``sample_count`` doubles.
    """
    _check_s(s)
    config = config or SpectralConfig()
    family = default_family() if family is None else family
    lo, hi = multiplier_budget(s)
    budget = max(hi, 1 / lo)
    entries = []
    for name, g in family:
        entries.append(SpectralEntry(name, direct_seminorm(g, s, box),
                                     fourier_seminorm(g, s, config),
                                     fourier_seminorm(g, s, config.doubled())))
    notes = []
    if s == 0.5:
        notes.append("s = 1/2 is the borderline case; reported for information only")
    report = SpectralReport(s, entries, budget, (lo, hi), config, notes)
    if check and not report.passes:
        bad = [e.name for e in entries if not 1 / budget <= e.ratio <= budget]
        raise EquivalenceViolation("spectral ratio outside budget or unstable", bad)
    return report
