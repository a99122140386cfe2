"""Strip and graph domains, Lipschitz profiles, grid functions and the
shear / dilation / profile-restriction transforms."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, ParameterError, PreconditionError, RegimeError

CERT_EPS = 1e-9


@dataclass(frozen=True)
class SeminormParams:
    """Dimension ``N``, smoothness ``s`` and integrability ``p``."""

    N: int
    s: float
    p: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N}")
        if not 0.0 < self.s < 1.0:
            raise ParameterError(f"s must lie in (0, 1), got {self.s}")
        if not 1.0 < self.p < math.inf:
            raise ParameterError(f"p must lie in (1, inf), got {self.p}")

    @property
    def sp(self) -> float:
        return self.s * self.p

    @property
    def trace_regime(self) -> bool:
        return self.sp > 1.0

    def require_trace_regime(self):
        if not self.trace_regime:
            raise RegimeError(f"operation needs s*p > 1, got s*p = {self.sp:g}")

    def to_dict(self) -> dict:
        return {"N": int(self.N), "s": float(self.s), "p": float(self.p)}


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]`` in R^d (d may be 0)."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi):
            raise DomainError("box corners have different dimensions")
        if any(b <= a for a, b in zip(lo, hi)):
            raise DomainError(f"degenerate box {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def centered(cls, dim: int, half_width: float, center=None) -> "Box":
        if half_width <= 0:
            raise DomainError("truncation half-width must be positive")
        c = np.zeros(dim) if center is None else np.broadcast_to(np.asarray(center, float), (dim,))
        return cls(tuple(c - half_width), tuple(c + half_width))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def measure(self) -> float:
        return float(np.prod(self.widths)) if self.dim else 1.0

    def shifted(self, offset) -> "Box":
        off = np.broadcast_to(np.asarray(offset, float), (self.dim,))
        return Box(tuple(np.asarray(self.lo) + off), tuple(np.asarray(self.hi) + off))

    def extended(self, lo_extra: tuple, hi_extra: tuple) -> "Box":
        return Box(self.lo + tuple(lo_extra), self.hi + tuple(hi_extra))

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        return np.all((pts >= np.asarray(self.lo)) & (pts <= np.asarray(self.hi)), axis=-1)

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class CertificationReport:
    max_ratio: float
    pairs_checked: int
    min_value: float


@dataclass(frozen=True)
class LipschitzProfile:
    """A positive Lipschitz function on a truncation box of R^d.

    ``evaluator`` maps an array of points with trailing axis ``d`` to values.
    Construction certifies positivity and the Lipschitz bound on a sample
    mesh plus random pairs.
    """

    evaluator: Callable
    lipschitz_bound: float
    half_width: float
    dim: int = 1
    name: str = "custom"
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lipschitz_bound < 0:
            raise DomainError("Lipschitz bound must be non-negative")
        if self.half_width <= 0:
            raise DomainError("truncation half-width must be positive")
        self.certify()

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        return np.asarray(self.evaluator(pts), float) * np.ones(pts.shape[:-1])

    @property
    def box(self) -> Box:
        return Box.centered(self.dim, self.half_width)

    def mesh(self, per_axis: int | None = None) -> np.ndarray:
        per_axis = per_axis or (4001 if self.dim == 1 else 81)
        axes = [np.linspace(-self.half_width, self.half_width, per_axis)] * self.dim
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)

    def certify(self, n_random: int = 4000, seed: int = 0) -> CertificationReport:
        pts = self.mesh()
        vals = self(pts)
        if not np.all(np.isfinite(vals)) or np.min(vals) <= 0:
            raise DomainError(f"profile '{self.name}' is not positive on its box")
        rng = np.random.default_rng(seed)
        i = rng.integers(0, len(pts), n_random)
        j = rng.integers(0, len(pts), n_random)
        a = np.concatenate([pts[:-1], pts[i]])
        b = np.concatenate([pts[1:], pts[j]])
        dist = np.linalg.norm(a - b, axis=-1)
        keep = dist > 0
        diff = np.abs(self(a[keep]) - self(b[keep]))
        excess = diff - (self.lipschitz_bound + CERT_EPS) * dist[keep]
        ratio = float(np.max(diff / dist[keep])) if keep.any() else 0.0
        if np.any(excess > 1e-12):
            raise DomainError(
                f"profile '{self.name}' violates its Lipschitz bound "
                f"{self.lipschitz_bound:g} (observed {ratio:g})"
            )
        return CertificationReport(ratio, int(keep.sum()), float(np.min(vals)))

    def bounds(self) -> tuple[float, float]:
        vals = self(self.mesh())
        return float(vals.min()), float(vals.max())

    def scaled(self, factor: float) -> "LipschitzProfile":
        if factor <= 0:
            raise ParameterError("profile scale factor must be positive")
        ev = self.evaluator
        return LipschitzProfile(
            lambda x: factor * np.asarray(ev(x), float),
            self.lipschitz_bound * factor,
            self.half_width,
            self.dim,
            f"{factor:g}*{self.name}",
            dict(self.settings, scale=factor * self.settings.get("scale", 1.0)),
        )

    def to_dict(self) -> dict:
        return {"name": self.name, "lipschitz_bound": self.lipschitz_bound,
                "half_width": self.half_width, "dim": self.dim, **self.settings}


def make_profile(name: str, half_width: float = 4.0, dim: int = 1, **params) -> LipschitzProfile:
    """Build a named profile: constant, sine, abs_clamp or linear."""
    from .errors import CatalogLookupError

    if name == "constant":
        c = float(params.get("value", 1.0))
        return LipschitzProfile(lambda x: np.full(x.shape[:-1], c), 0.0, half_width, dim,
                                name, {"value": c})
    if name == "sine":
        base = float(params.get("base", 1.0))
        amp = float(params.get("amplitude", 0.5))
        freq = float(params.get("frequency", 1.0))
        return LipschitzProfile(lambda x: base + amp * np.sin(freq * x[..., 0]),
                                abs(amp * freq), half_width, dim, name,
                                {"base": base, "amplitude": amp, "frequency": freq})
    if name == "abs_clamp":
        base = float(params.get("base", 1.0))
        slope = float(params.get("slope", 0.5))
        clamp = float(params.get("clamp", 2.0))
        return LipschitzProfile(
            lambda x: base + slope * np.minimum(np.linalg.norm(x, axis=-1), clamp),
            abs(slope), half_width, dim, name, {"base": base, "slope": slope, "clamp": clamp})
    if name == "linear":
        slope = float(params.get("slope", 0.5))
        offset = float(params.get("offset", 0.0))
        # not necessarily positive: used as a lower graph, so skip certification of sign
        return _SignedProfile(lambda x: offset + slope * x[..., 0], abs(slope), half_width, dim,
                              name, {"slope": slope, "offset": offset})
    raise CatalogLookupError(f"unknown profile '{name}'")


class _SignedProfile(LipschitzProfile):
    """Lipschitz graph allowed to change sign (lower boundaries before flattening)."""

    def certify(self, n_random: int = 4000, seed: int = 0) -> CertificationReport:
        shifted = LipschitzProfile.__new__(LipschitzProfile)
        lo = float(np.min(self.evaluator(self.mesh())))
        for name, value in (("evaluator", lambda x, ev=self.evaluator: ev(x) - lo + 1.0),
                            ("lipschitz_bound", self.lipschitz_bound),
                            ("half_width", self.half_width), ("dim", self.dim),
                            ("name", self.name), ("settings", self.settings)):
            object.__setattr__(shifted, name, value)
        return LipschitzProfile.certify(shifted, n_random, seed)


@dataclass(frozen=True)
class StripDomain:
    """``{lower(x') < x_N < lower(x') + height(x')}`` over a truncation box in R^{N-1}.

    ``kind`` is ``"flat"`` (constant height ``b``) or ``"graph"`` (height
    given by a :class:`LipschitzProfile`).  ``lower`` is ``None`` for the
    normalized case of a flat bottom at 0.
    """

    kind: str
    box: Box
    b: float | None = None
    profile: LipschitzProfile | None = None
    lower: Callable | None = None

    def __post_init__(self):
        if self.kind == "flat":
            if self.b is None or not self.b > 0:
                raise DomainError(f"flat strip needs height b > 0, got {self.b}")
        elif self.kind == "graph":
            if self.profile is None:
                raise DomainError("graph domain needs a profile")
            if self.box.dim != self.profile.dim:
                raise DomainError("profile and truncation box dimensions differ")
            if self.box.dim > 1:
                raise DomainError("graph domains are limited to N <= 2")
        else:
            raise DomainError(f"unknown domain kind '{self.kind}'")
        if self.box.dim > 2:
            raise DomainError("bulk domains are limited to N <= 3")

    @classmethod
    def flat(cls, b: float, half_width: float = 4.0, dim: int = 1, box: Box | None = None):
        if dim == 0:
            return cls("flat", Box((), ()), b=b)
        return cls("flat", box or Box.centered(dim, half_width), b=b)

    @classmethod
    def graph(cls, profile: LipschitzProfile, box: Box | None = None):
        return cls("graph", box or profile.box, profile=profile)

    @property
    def N(self) -> int:
        return self.box.dim + 1

    def height(self, xp) -> np.ndarray:
        xp = np.asarray(xp, float)
        if self.kind == "flat":
            return np.full(xp.shape[:-1], float(self.b))
        return self.profile(xp)

    def floor(self, xp) -> np.ndarray:
        xp = np.asarray(xp, float)
        if self.lower is None:
            return np.zeros(xp.shape[:-1])
        return np.asarray(self.lower(xp), float) * np.ones(xp.shape[:-1])

    def height_range(self) -> tuple[float, float]:
        if self.kind == "flat":
            return float(self.b), float(self.b)
        return self.profile.bounds()

    def bounding_box(self) -> Box:
        """Box in R^N enclosing the truncated domain."""
        if self.box.dim == 0:
            return Box((0.0,), (float(self.b),))
        xs = _mesh(self.box, 401 if self.box.dim == 1 else 61)
        low = self.floor(xs)
        top = low + self.height(xs)
        return self.box.extended((float(low.min()),), (float(top.max()),))

    def contains(self, points, closed: bool = False) -> np.ndarray:
        """Membership in the open domain, or in its closure with ``closed``."""
        pts = np.asarray(points, float)
        xp, xn = pts[..., :-1], pts[..., -1]
        low = self.floor(xp)
        top = low + self.height(xp)
        if closed:
            slack = 1e-12 * np.maximum(1.0, np.abs(top))
            inside = (xn >= low - slack) & (xn <= top + slack)
        else:
            inside = (xn > low) & (xn < top)
        if self.box.dim:
            inside &= self.box.contains(xp)
        return inside

    def is_rectangle(self) -> bool:
        return self.kind == "flat" and self.lower is None

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "N": self.N, "box": self.box.to_dict()}
        if self.kind == "flat":
            out["b"] = float(self.b)
        else:
            out["profile"] = self.profile.to_dict()
        if self.lower is not None:
            out["lower"] = getattr(self.lower, "name", "custom")
        return out


def _mesh(box: Box, per_axis: int) -> np.ndarray:
    axes = [np.linspace(a, b, per_axis) for a, b in zip(box.lo, box.hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, box.dim)


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on a regular node grid.

    Nodes sit at ``origin + index * spacing``.  ``mask`` marks nodes inside
    the domain; nodes outside keep a finite placeholder value of 0.
    """

    dims: tuple
    spacing: tuple
    origin: tuple
    values: np.ndarray
    domain_tag: str = "boundary"
    mask: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, float).reshape(tuple(self.dims))
        if not np.all(np.isfinite(vals)):
            raise ParameterError("grid values must be finite")
        if self.domain_tag not in ("boundary", "bulk"):
            raise ParameterError(f"unknown domain tag '{self.domain_tag}'")
        if any(h <= 0 for h in self.spacing):
            raise ParameterError("grid spacing must be positive")
        object.__setattr__(self, "values", vals)
        if self.mask is not None:
            object.__setattr__(self, "mask", np.asarray(self.mask, bool).reshape(vals.shape))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def nodes(self) -> np.ndarray:
        axes = [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.dims)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @classmethod
    def sample(cls, fn: Callable, box: Box, dims, domain_tag="boundary", domain=None):
        dims = tuple(int(n) for n in dims)
        spacing = tuple((b - a) / (n - 1) for a, b, n in zip(box.lo, box.hi, dims))
        grid = cls(dims, spacing, box.lo, np.zeros(dims), domain_tag)
        pts = grid.nodes()
        mask = None if domain is None else domain.contains(pts, closed=True)
        vals = np.asarray(fn(pts), float)
        if mask is not None:
            vals = np.where(mask, vals, 0.0)
        return cls(dims, spacing, box.lo, vals, domain_tag, mask)

    def __call__(self, points) -> np.ndarray:
        """Multilinear interpolation; points beyond the grid take the nearest edge value."""
        from scipy.interpolate import RegularGridInterpolator

        axes = [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.dims)]
        pts = np.asarray(points, float)
        clipped = np.clip(pts, [a[0] for a in axes], [a[-1] for a in axes])
        interp = RegularGridInterpolator(axes, self.values)
        return interp(clipped.reshape(-1, self.ndim)).reshape(pts.shape[:-1])

    def to_csv(self, path):
        pts = self.nodes().reshape(-1, self.ndim)
        vals = self.values.reshape(-1)
        keep = np.ones(len(vals), bool) if self.mask is None else self.mask.reshape(-1)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["dims", "spacing", "origin"])
            w.writerow([" ".join(str(n) for n in self.dims),
                        " ".join(repr(float(h)) for h in self.spacing),
                        " ".join(repr(float(o)) for o in self.origin)])
            for pt, v in zip(pts[keep], vals[keep]):
                w.writerow([repr(float(c)) for c in pt] + [repr(float(v))])

    @classmethod
    def from_csv(cls, path, domain_tag: str = "boundary") -> "GridFunction":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0][:3]] != ["dims", "spacing", "origin"]:
            raise ParameterError(f"{path}: missing 'dims,spacing,origin' header")
        dims = tuple(int(v) for v in rows[1][0].split())
        spacing = tuple(float(v) for v in rows[1][1].split())
        origin = tuple(float(v) for v in rows[1][2].split())
        vals = np.zeros(dims)
        seen = np.zeros(dims, bool)
        for row in rows[2:]:
            if not row:
                continue
            nums = [float(v) for v in row]
            idx = tuple(int(round((c - o) / h)) for c, o, h in zip(nums[:-1], origin, spacing))
            vals[idx] = nums[-1]
            seen[idx] = True
        mask = None if seen.all() else seen
        return cls(dims, spacing, origin, vals, domain_tag, mask)


@dataclass(frozen=True)
class ShearResult:
    function: Callable
    domain: StripDomain
    comparison_bound: float | None


def flatten_shear(u: Callable, lower: Callable, upper: Callable, box: Box,
                  lipschitz: float = 0.0, params: SeminormParams | None = None) -> ShearResult:
    """Move the lower graph to 0: ``v(x', x_N) = u(x', x_N + lower(x'))``.

    The returned domain is the graph of ``upper - lower``.  When ``params`` is
    given, the two-sided comparison constant ``(2 + L)^(N + sp)`` is reported.
    """
    xs = _mesh(box, 2001 if box.dim == 1 else 81)
    gap = np.asarray(upper(xs), float) - np.asarray(lower(xs), float)
    if np.any(gap <= 0):
        raise DomainError("lower profile must stay strictly below the upper profile")
    upper_l = getattr(upper, "lipschitz_bound", None)
    height = LipschitzProfile(
        lambda x: np.asarray(upper(x), float) - np.asarray(lower(x), float),
        (upper_l if upper_l is not None else _estimate_lipschitz(upper, box)) + lipschitz,
        float(np.max(np.abs(np.concatenate([box.lo, box.hi])))), box.dim, "sheared")

    def v(points):
        pts = np.asarray(points, float)
        shift = np.asarray(lower(pts[..., :-1]), float)
        moved = pts.copy()
        moved[..., -1] = pts[..., -1] + shift
        return u(moved)

    bound = None
    if params is not None:
        bound = (2.0 + lipschitz) ** (params.N + params.sp)
    return ShearResult(v, StripDomain("graph", box, profile=height), bound)


def _estimate_lipschitz(fn: Callable, box: Box) -> float:
    xs = _mesh(box, 2001 if box.dim == 1 else 81)
    vals = np.asarray(fn(xs), float)
    if box.dim == 1:
        return float(np.max(np.abs(np.diff(vals)) / np.diff(xs[:, 0])))
    return 0.0


def dilate_vertical(u: Callable, domain: StripDomain, alpha: float):
    """Return ``(v, rescaled_domain)`` with ``v(x', x_N) = u(x', alpha * x_N)``."""
    if not alpha > 0:
        raise ParameterError(f"dilation factor must be positive, got {alpha}")

    def v(points):
        pts = np.array(points, float, copy=True)
        pts[..., -1] *= alpha
        return u(pts)

    if domain.kind == "flat":
        new = StripDomain("flat", domain.box, b=domain.b / alpha)
    else:
        new = StripDomain("graph", domain.box, profile=domain.profile.scaled(1.0 / alpha))
    return v, new


@dataclass(frozen=True)
class DecreaserReport:
    far_small_screen: float
    far_large_screen_plus_close: float
    close_small_screen: float
    close_large_screen: float
    lipschitz: float

    @property
    def holds(self) -> bool:
        tol = 1e-9 + 5e-3 * max(self.far_large_screen_plus_close, 0.0)
        tol_close = 1e-9 + 5e-3 * self.close_large_screen
        return (self.far_small_screen <= self.far_large_screen_plus_close + tol
                and self.close_small_screen <= self.close_large_screen + tol_close)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.far_small_screen, self.far_large_screen_plus_close, self.close_small_screen)


def restrict_profile(g: Callable, eta1, eta2, params: SeminormParams, box: Box,
                     check: bool = True) -> DecreaserReport:
    """Compare far/close seminorms of ``g`` under a large screen ``eta1`` and
    a smaller screen ``eta2 <= eta1``.

    The far seminorm for the smaller screen is bounded by the far seminorm
    for the larger one plus ``(1 + L)`` times the close seminorm for the
    larger one, where ``L`` is the Lipschitz bound of ``eta2``.
    """
    from .errors import BoundViolation
    from .seminorms import close_screened, far_screened

    xs = _mesh(box, 4001 if box.dim == 1 else 81)
    e1, e2 = _screen_values(eta1, xs), _screen_values(eta2, xs)
    if np.any(e2 > e1 + 1e-12):
        raise PreconditionError("restrict_profile needs eta2 <= eta1 on the whole box")
    lip = float(getattr(eta2, "lipschitz_bound", 0.0))
    far2 = far_screened(g, eta2, params, box).value_p
    far1 = far_screened(g, eta1, params, box).value_p
    close1 = close_screened(g, eta1, params, box).value_p
    close2 = close_screened(g, eta2, params, box).value_p
    report = DecreaserReport(far2, far1 + (1.0 + lip) * close1, close2, close1, lip)
    if check and not report.holds:
        raise BoundViolation(f"screen-restriction inequality failed: {report}")
    return report


def _screen_values(screen, xs) -> np.ndarray:
    if callable(screen):
        return np.asarray(screen(xs), float) * np.ones(xs.shape[:-1])
    return np.full(xs.shape[:-1], float(screen))
