"""Command-line front end.

Exit codes: 0 success, 1 library error, 2 finished with a convergence
warning, 3 verification failure, 64 usage error.  Settings come from an INI
file (``--config``; one section per command, plus an optional ``[common]``
section) and are overridden by explicit flags.  Reports are JSON on stdout
with sorted keys and embed the resolved configuration.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import analysis, catalog, extension, spectral, suites
from .domain import Box, GridFunction, SeminormParams, StripDomain, make_profile
from .errors import ConvergenceWarning, FracStripError, WindowingWarning
from .quadrature import QuadratureConfig
from .seminorms import (close_screened, difference_trace, far_screened, gagliardo,
                        slice_horizontal_far, slice_horizontal_near, slice_vertical,
                        weighted_lp_trace)

EXIT_OK, EXIT_ERROR, EXIT_WARNING, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 3, 64

SEMINORM_KINDS = {
    "gagliardo": "gagliardo", "close": "close_screened", "close_screened": "close_screened",
    "far": "far_screened", "far_screened": "far_screened", "slice_vertical": "slice_vertical",
    "slice_horizontal_near": "slice_horizontal_near",
    "slice_horizontal_far": "slice_horizontal_far", "difference_trace": "difference_trace",
    "weighted_lp_trace": "weighted_lp_trace",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# option plumbing

# name -> (type, default); every option defaults to None on the parser so the
# config file can fill gaps before these defaults apply
COMMON = {"s": (float, None), "p": (float, 2.0), "N": (int, 2), "b": (float, None),
          "half_width": (float, None), "cells": (int, 16), "levels": (int, 2),
          "out": (str, None)}


def _pairs(items) -> dict:
    out = {}
    for item in items or ():
        for part in str(item).split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise UsageError(f"expected key=value, got '{part}'")
            key, value = part.split("=", 1)
            try:
                out[key.strip()] = float(value)
            except ValueError:
                out[key.strip()] = value.strip()
    return out


def _add_common(p: argparse.ArgumentParser, with_b: bool = True):
    p.add_argument("--config", help="INI file; flags override its values")
    p.add_argument("--s", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--N", type=int)
    if with_b:
        p.add_argument("--b", type=float, help="flat strip height")
    p.add_argument("--half-width", dest="half_width", type=float,
                   help="half-width of the truncation box")
    p.add_argument("--cells", type=int, help="cells along the shortest side (bulk quadrature)")
    p.add_argument("--levels", type=int, help="refinement levels (bulk quadrature)")
    p.add_argument("--out", help="directory for CSV artifacts")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracstrip", description="Screened fractional seminorms on strips.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("seminorm", help="compute one seminorm")
    _add_common(p)
    p.add_argument("--kind", choices=sorted(SEMINORM_KINDS))
    p.add_argument("--fn", help="catalog function name")
    p.add_argument("--fn-param", action="append", dest="fn_param", help="key=value")
    p.add_argument("--grid", help="GridFunction CSV instead of a catalog function")
    p.add_argument("--screen", type=float)
    p.add_argument("--unweighted", action="store_true", default=None,
                   help="far seminorm without the screen weights")
    p.add_argument("--domain", choices=("flat", "graph"))
    p.add_argument("--profile", help="profile name for graph domains / variable screens")
    p.add_argument("--profile-param", action="append", dest="profile_param")
    p.add_argument("--r", type=float, help="radius for weighted_lp_trace")

    p = sub.add_parser("extend", help="build an extension and report trace errors")
    _add_common(p)
    p.add_argument("--mode", choices=("two-sided", "flat", "general"))
    p.add_argument("--f-plus", dest="f_plus")
    p.add_argument("--f-plus-param", action="append", dest="f_plus_param")
    p.add_argument("--f-minus", dest="f_minus")
    p.add_argument("--f-minus-param", action="append", dest="f_minus_param")
    p.add_argument("--g", help="boundary function for flat/general modes")
    p.add_argument("--g-param", action="append", dest="g_param")
    p.add_argument("--profile")
    p.add_argument("--profile-param", action="append", dest="profile_param")
    p.add_argument("--grid-dims", dest="grid_dims", help="e.g. 161x41")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite")
    _add_common(p)
    p.add_argument("--lam", type=float, help="exponent of max(1, x^lam) for containment")

    p = sub.add_parser("spectral", help="direct versus Fourier seminorms (p = 2)")
    _add_common(p, with_b=False)
    p.add_argument("--sample-count", dest="sample_count", type=int)
    p.add_argument("--spacing", type=float)
    p.add_argument("--window", choices=("none", "raised-cosine"))
    p.add_argument("--xi-max", dest="xi_max", type=float, help="largest frequency in the CSV")

    p = sub.add_parser("rates", help="divergence rate of a truncated seminorm")
    _add_common(p, with_b=False)
    p.add_argument("--fn")
    p.add_argument("--fn-param", action="append", dest="fn_param")
    p.add_argument("--kind", choices=analysis.KINDS)
    p.add_argument("--radii", help="comma-separated, geometric")
    p.add_argument("--screen", type=float)

    p = sub.add_parser("catalog", help="list catalog functions")
    p.add_argument("action", nargs="?", default="list", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.add_argument("--config")
    return parser


def _read_config(path: str | None, command: str) -> dict:
    if not path:
        return {}
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(path):
        raise UsageError(f"cannot read config file '{path}'")
    out = {}
    for section in ("common", command):
        if parser.has_section(section):
            out.update({k.replace("-", "_"): v for k, v in parser.items(section)})
    return out


def _coerce(value, kind):
    if value is None or kind is None:
        return value
    if kind is bool:
        return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
    if kind is list:
        return value if isinstance(value, list) else [value]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise UsageError(f"bad value '{value}'") from None


def resolve(args: argparse.Namespace, types: dict) -> dict:
    """Merge defaults, config file and flags (in increasing priority)."""
    file_values = _read_config(getattr(args, "config", None), args.command)
    unknown = set(file_values) - set(types) - set(vars(args))
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, (kind, default) in types.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_values:
            out[key] = _coerce(file_values[key], kind)
        else:
            out[key] = default
    return out


def _params(cfg: dict, N: int | None = None) -> SeminormParams:
    if cfg.get("s") is None:
        raise UsageError("--s is required")
    return SeminormParams(N or cfg["N"], cfg["s"], cfg["p"])


def _quad(cfg: dict) -> QuadratureConfig:
    return QuadratureConfig(cells_per_axis=cfg["cells"], refinement_levels=cfg["levels"])


def _emit(report: dict, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(_clean(report), sort_keys=True, indent=2) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _out_dir(cfg: dict) -> Path | None:
    if not cfg.get("out"):
        return None
    path = Path(cfg["out"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, header: str, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row) + "\n")


def _profile(cfg: dict, half_width: float):
    if not cfg.get("profile"):
        return None
    return make_profile(cfg["profile"], half_width=half_width, **_pairs(cfg.get("profile_param")))


# ---------------------------------------------------------------------------
# commands


def _default_half_width(fn) -> float:
    """Wide boxes for jumps: their far tails decay only like ``R^(-sp)``."""
    lo, hi = getattr(fn, "limits", (0.0, 0.0))
    return 64.0 if math.isfinite(lo) and math.isfinite(hi) and lo != hi else 8.0


SEMINORM_TYPES = {**COMMON, "kind": (str, None), "fn": (str, None), "fn_param": (list, None),
                  "grid": (str, None), "screen": (float, 1.0), "unweighted": (bool, False),
                  "domain": (str, "flat"), "profile": (str, None),
                  "profile_param": (list, None), "r": (float, 1.0)}


def cmd_seminorm(args) -> tuple[dict, int]:
    cfg = resolve(args, SEMINORM_TYPES)
    kind = SEMINORM_KINDS.get(cfg["kind"] or "")
    if kind is None:
        raise UsageError("--kind is required")
    if bool(cfg["fn"]) == bool(cfg["grid"]):
        raise UsageError("give exactly one of --fn or --grid")
    if cfg["fn"]:
        fn = catalog.get(cfg["fn"], **_pairs(cfg["fn_param"]))
        tag = fn.domain_tag
        lo_box = None
    else:
        fn = GridFunction.from_csv(cfg["grid"])
        if fn.ndim > 1:
            fn = GridFunction.from_csv(cfg["grid"], domain_tag="bulk")
        tag = fn.domain_tag
        lo_box = Box(tuple(fn.origin), tuple(o + h * (n - 1) for o, h, n in
                                             zip(fn.origin, fn.spacing, fn.dims)))
    if tag == "boundary":
        if lo_box is not None and lo_box.dim == 1 and cfg["half_width"] is None:
            box = lo_box
        else:
            box = Box.centered(1, cfg["half_width"] or _default_half_width(fn))
        params = _params(cfg)
        screen = _profile(cfg, max(abs(box.lo[0]), abs(box.hi[0]))) or cfg["screen"]
        if kind == "gagliardo":
            rep = gagliardo(fn, params, box)
        elif kind == "close_screened":
            rep = close_screened(fn, screen, params, box)
        elif kind == "far_screened":
            rep = far_screened(fn, screen, params, box, weighted=not cfg["unweighted"])
        elif kind == "weighted_lp_trace":
            profile = _profile(cfg, box.hi[0]) or cfg["screen"]
            value = weighted_lp_trace(fn, cfg["r"], profile, params.p, box)
            return {"kind": kind, "value_p": value, "config": cfg}, EXIT_OK
        else:
            raise UsageError(f"--kind {cfg['kind']} needs a bulk function")
        out = rep.to_json()
    else:
        params = _params(cfg)
        half = cfg["half_width"] or 4.0
        if cfg["domain"] == "graph":
            profile = _profile(cfg, half)
            if profile is None:
                raise UsageError("graph domains need --profile")
            domain = StripDomain.graph(profile)
        else:
            if cfg["b"] is None:
                if lo_box is not None:
                    cfg["b"] = lo_box.hi[-1]
                else:
                    raise UsageError("flat domains need --b")
            if lo_box is not None and cfg["half_width"] is None:
                domain = StripDomain.flat(cfg["b"], box=Box(lo_box.lo[:-1], lo_box.hi[:-1]))
            else:
                domain = StripDomain.flat(cfg["b"], half_width=half, dim=params.N - 1)
        funcs = {"gagliardo": lambda: gagliardo(fn, params, domain, config=_quad(cfg)),
                 "slice_vertical": lambda: slice_vertical(fn, params, domain),
                 "slice_horizontal_near": lambda: slice_horizontal_near(fn, params, domain),
                 "slice_horizontal_far": lambda: slice_horizontal_far(fn, params, domain),
                 "difference_trace": lambda: difference_trace(params, domain, u=fn)}
        if kind not in funcs:
            raise UsageError(f"--kind {cfg['kind']} needs a boundary function")
        out = funcs[kind]().to_json()
    out["config"] = cfg
    return out, EXIT_OK


EXTEND_TYPES = {**COMMON, "mode": (str, "two-sided"), "f_plus": (str, None),
                "f_plus_param": (list, None), "f_minus": (str, None),
                "f_minus_param": (list, None), "g": (str, None), "g_param": (list, None),
                "profile": (str, None), "profile_param": (list, None),
                "grid_dims": (str, "161x41")}


def _trace_errors(u, target, xs, layer, deltas) -> dict:
    want = np.asarray(target(xs[:, None]), float)
    errs = [float(np.max(np.abs(u(np.stack([xs, np.full_like(xs, layer(d))], -1)) - want)))
            for d in deltas]
    return {"deltas": [float(d) for d in deltas], "sup_errors": errs,
            "order": suites.fitted_order(deltas, errs) if min(errs) > 1e-14 else None}


def cmd_extend(args) -> tuple[dict, int]:
    cfg = resolve(args, EXTEND_TYPES)
    params = _params(cfg)
    params.require_trace_regime()
    half = cfg["half_width"] or 4.0
    mode = cfg["mode"]
    big = Box.centered(1, 2 * half)
    deltas = np.array(suites.TRACE_DELTAS)
    xs = np.linspace(-half, half, 801)
    out: dict = {"mode": mode}
    if mode in ("two-sided", "flat") and cfg["b"] is None:
        raise UsageError("flat strips need --b")
    if mode == "two-sided":
        if not (cfg["f_plus"] and cfg["f_minus"]):
            raise UsageError("two-sided mode needs --f-plus and --f-minus")
        b = cfg["b"]
        f_plus = catalog.get(cfg["f_plus"], **_pairs(cfg["f_plus_param"]))
        f_minus = catalog.get(cfg["f_minus"], **_pairs(cfg["f_minus_param"]))
        u = extension.extend_two_sided_flat(f_plus, f_minus, b, params=params, box=big)
        domain = StripDomain.flat(b, half_width=half)
        out["trace_top"] = _trace_errors(u, f_plus, xs, lambda d: b - d, deltas * b)
        out["trace_bottom"] = _trace_errors(u, f_minus, xs, lambda d: d, deltas * b)
        hyp = extension.two_sided_hypotheses(f_plus, f_minus, b, params, big)
        rhs, divergent = hyp.total, hyp.divergent
        out["hypotheses"] = {"difference_lp": hyp.difference_lp, "close": list(hyp.close),
                             "far": list(hyp.far), "divergent": divergent}
    else:
        if not cfg["g"]:
            raise UsageError(f"{mode} mode needs --g")
        g = catalog.get(cfg["g"], **_pairs(cfg["g_param"]))
        if mode == "flat":
            b = cfg["b"]
            u = extension.extend_flat(g, b, params=params, box=big)
            domain = StripDomain.flat(b, half_width=half)
            screen = b
        else:
            profile = _profile(cfg, half)
            if profile is None:
                raise UsageError("general mode needs --profile")
            u = extension.extend_general(g, profile, params=params, box=big)
            domain = StripDomain.graph(profile)
            screen = lambda x, prof=profile: 0.5 * prof(x)
        out["trace_bottom"] = _trace_errors(u, g, xs, lambda d: d, deltas)
        rhs = close_screened(g, screen, params, big).value_p + \
            far_screened(g, screen, params, big).value_p
        divergent = False
    G = gagliardo(u, params, domain, config=_quad(cfg))
    out["seminorm"] = G.to_json()
    out["hypothesis_sum"] = rhs
    out["budget_ratio"] = G.value_p / rhs if rhs > 0 else (0.0 if G.value_p <= 1e-12 else math.inf)
    out["flags"] = {**getattr(u, "flags", {}), "hypothesis_divergent": divergent}
    folder = _out_dir(cfg)
    if folder is not None:
        try:
            dims = tuple(int(v) for v in cfg["grid_dims"].lower().split("x"))
        except ValueError:
            raise UsageError("--grid-dims must look like 161x41") from None
        grid = GridFunction.sample(u, domain.bounding_box(), dims, "bulk", domain)
        path = folder / "extension.csv"
        grid.to_csv(path)
        out["grid_csv"] = str(path)
    out["config"] = cfg
    return out, EXIT_OK


VERIFY_TYPES = {**COMMON, "lam": (float, None)}


def cmd_verify(args) -> tuple[dict, int]:
    if args.suite not in suites.SUITES:
        raise UsageError(f"unknown suite '{args.suite}'; expected one of {suites.SUITES}")
    cfg = resolve(args, VERIFY_TYPES)
    if cfg["s"] is None:
        cfg["s"] = 0.75 if args.suite in ("spectral", "containment") else 0.6
    params = _params(cfg)
    checks = suites.run_suite(args.suite, params, b=cfg["b"] or 1.0, lam=cfg["lam"])
    failed = [c.name for c in checks if not c.passed]
    out = {"suite": args.suite, "checks": [c.to_json() for c in checks], "pass": not failed,
           "failed": failed, "budgets": suites.BUDGETS, "config": cfg}
    if args.suite == "containment":
        rep = analysis.containment_demo(params.s, params.p, cfg["lam"])
        out["verdicts"] = {"indicator": rep.indicator, "powerlaw_clamp": rep.powerlaw}
        folder = _out_dir(cfg)
        if folder is not None:
            for key, fit in rep.fits.items():
                _write_csv(folder / f"rates_{key}.csv", "R,value", fit.rows())
    return out, EXIT_OK if not failed else EXIT_VERIFY


SPECTRAL_TYPES = {**COMMON, "sample_count": (int, 4096), "spacing": (float, 1 / 32),
                  "window": (str, "none"), "xi_max": (float, 64.0)}


def cmd_spectral(args) -> tuple[dict, int]:
    cfg = resolve(args, SPECTRAL_TYPES)
    if cfg["s"] is None:
        cfg["s"] = 0.75
    conf = spectral.SpectralConfig(cfg["sample_count"], cfg["spacing"], cfg["window"])
    rep = spectral.equivalence_check_spectral(None, cfg["s"], conf)
    fit = spectral.multiplier_slope(cfg["s"])
    out = rep.to_json()
    out["multiplier_slope"] = {"slope": fit.slope, "expected": 2 * cfg["s"] - 1,
                               "residual": fit.residual}
    folder = _out_dir(cfg)
    if folder is not None:
        xi = np.geomspace(1e-2, cfg["xi_max"], 200)
        _write_csv(folder / "multiplier.csv", "xi,m",
                   zip(xi, spectral.multiplier_profile(cfg["s"], xi, check=False)))
        _write_csv(folder / "spectral_ratios.csv", "function_id,direct,spectral,ratio",
                   [(e.name, e.direct, e.spectral, e.ratio) for e in rep.entries])
    out["config"] = cfg
    return out, EXIT_OK if rep.passes else EXIT_VERIFY


RATES_TYPES = {**COMMON, "fn": (str, "heaviside"), "fn_param": (list, None),
               "kind": (str, "unscreened"), "radii": (str, None), "screen": (float, 1.0)}


def cmd_rates(args) -> tuple[dict, int]:
    cfg = resolve(args, RATES_TYPES)
    params = _params(cfg)
    fn = catalog.get(cfg["fn"], **_pairs(cfg["fn_param"]))
    if cfg["radii"]:
        try:
            radii = [float(r) for r in str(cfg["radii"]).split(",")]
        except ValueError:
            raise UsageError("--radii must be comma-separated numbers") from None
    else:
        radii = analysis.DEFAULT_RADII
    fit = analysis.divergence_exponent(fn, cfg["kind"], params, radii, cfg["screen"])
    folder = _out_dir(cfg)
    if folder is not None:
        _write_csv(folder / f"rates_{cfg['fn']}_{cfg['kind']}.csv", "R,value", fit.rows())
    out = fit.to_json()
    out["config"] = cfg
    return out, EXIT_OK


def cmd_catalog(args) -> tuple[dict, int]:
    if args.action == "show":
        if not args.name:
            raise UsageError("catalog show needs a name")
        return catalog.get(args.name).describe(), EXIT_OK
    return {"functions": catalog.listing()}, EXIT_OK


COMMANDS = {"seminorm": cmd_seminorm, "extend": cmd_extend, "verify": cmd_verify,
            "spectral": cmd_spectral, "rates": cmd_rates, "catalog": cmd_catalog}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConvergenceWarning)
            warnings.simplefilter("always", WindowingWarning)
            report, code = COMMANDS[args.command](args)
        notes = sorted({str(w.message) for w in caught
                        if issubclass(w.category, (ConvergenceWarning, WindowingWarning))})
        if notes:
            report["warnings"] = notes
            if code == EXIT_OK and any(issubclass(w.category, ConvergenceWarning)
                                       for w in caught):
                code = EXIT_WARNING
        _emit(report)
        return code
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except FracStripError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
