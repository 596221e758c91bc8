"""Command-line front end.

All parameter values on the command line and in config files are ``/2pi``
MHz user units, e.g. ``--gamma-q 0.16`` means gamma_q = 2pi * 0.16.

Examples::

    wgdetect bare --gamma-q 0.16 --delta 0 --Gamma1 0.16
    wgdetect cavity --h 0 --V 0.61 --g 0.29
    wgdetect fig 3 --out fig3.csv
    wgdetect sweep --flavor cavity --axis V:0:1.2:121 --axis g:0:0.6:61 --format json --out vg.json
    wgdetect optimize cavity
    wgdetect verify --draws 1000
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .model import BareParams, CavityParams, DegenerateDenominator, detection, matching_report
from .optimize import DEFAULT_BOUNDS, OptimizationProblem, optimize_bare, optimize_cavity
from .oracle import equivalence_run
from .serialize import dump_json, report_csv, report_to_json, sweep_to_json, write_csv, write_json
from .sweep import FIGURES, AxisSpec, InvalidAxis, SweepResult, figure_sweep, sweep

PARAMETER_FLAGS = {
    "gamma_q": "--gamma-q",
    "gamma_c": "--gamma-c",
    "h": "--h",
    "V": "--V",
    "g": "--g",
    "delta": "--delta",
    "delta_c": "--delta-c",
    "Gamma_1": "--Gamma1",
}
BARE_PARAMETERS = ("gamma_q", "h", "delta", "Gamma_1")

# Values used whenever a parameter is not given explicitly.
DEFAULTS = {"gamma_q": 0.16, "gamma_c": 0.76, "h": 0.0, "V": 0.61, "g": 0.29, "delta": 0.0, "delta_c": 0.0}

VERIFY_TOLERANCE = 1e-10


class UsageError(Exception):
    pass


class UnknownParameter(UsageError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict[str, float] = field(default_factory=dict)
    axes: list[AxisSpec] = field(default_factory=list)
    out: Path | None = None
    format: str = "csv"
    figure: int | None = None
    flavor: str = "cavity"
    g_mode: str = "fixed"
    free: tuple[str, ...] = ("V", "g")
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    draws: int = 1000
    seed: int = 0
    workers: int = 1


def _add_parameter_flags(p: argparse.ArgumentParser, names: Sequence[str]) -> None:
    for name in names:
        p.add_argument(PARAMETER_FLAGS[name], dest=f"param_{name}", type=float, metavar="X",
                       help=f"{name} / 2pi (MHz units)")


def _add_output_flags(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--out", type=Path, help="output file (a .manifest.json is written next to CSV output)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--config", type=Path, help="JSON config or a previous JSON output to re-run")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wgdetect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("bare", help="single bare-detector evaluation")
    _add_parameter_flags(p, BARE_PARAMETERS)
    _add_output_flags(p, "json")

    p = sub.add_parser("cavity", help="single cavity-detector evaluation")
    _add_parameter_flags(p, PARAMETER_FLAGS)
    _add_output_flags(p, "json")

    p = sub.add_parser("sweep", help="1-D or 2-D parameter grid")
    p.add_argument("--flavor", choices=("bare", "cavity"), default="cavity")
    p.add_argument("--axis", action="append", default=[], metavar="PARAM:START:STOP:COUNT")
    p.add_argument("--g-mode", choices=("fixed", "matched"), default=None,
                   help="hold g fixed (default) or set it to the matching value at each V")
    p.add_argument("--workers", type=int, default=1)
    _add_parameter_flags(p, PARAMETER_FLAGS)
    _add_output_flags(p, "csv")

    p = sub.add_parser("fig", help="regenerate the data behind a figure (2-6)")
    p.add_argument("figure", type=int, choices=sorted(FIGURES))
    p.add_argument("--axis", action="append", default=[], metavar="PARAM:START:STOP:COUNT")
    p.add_argument("--workers", type=int, default=1)
    _add_parameter_flags(p, PARAMETER_FLAGS)
    _add_output_flags(p, "csv")

    p = sub.add_parser("optimize", help="maximise the detection probability")
    p.add_argument("flavor", choices=("bare", "cavity"))
    p.add_argument("--free", default="V,g", help="comma-separated free parameters (cavity)")
    p.add_argument("--bound", action="append", default=[], metavar="PARAM:LO:HI")
    p.add_argument("--workers", type=int, default=1)
    _add_parameter_flags(p, PARAMETER_FLAGS)
    _add_output_flags(p, "json")

    p = sub.add_parser("verify", help="closed forms versus the linear-system oracle")
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)
    p.add_argument("--format", choices=("json",), default="json")
    return parser


def _parse_axis(text: str) -> AxisSpec:
    name = text.split(":", 1)[0]
    if name not in PARAMETER_FLAGS:
        raise UnknownParameter(f"unknown parameter {name!r} in --axis {text!r}")
    try:
        return AxisSpec.parse(text)
    except InvalidAxis as exc:
        raise UsageError(f"--axis {text!r}: {exc}") from None


def _parse_bound(text: str) -> tuple[str, tuple[float, float]]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--bound must look like PARAM:LO:HI, got {text!r}")
    name = parts[0]
    if name not in DEFAULT_BOUNDS:
        raise UnknownParameter(f"unknown parameter {name!r} in --bound")
    try:
        return name, (float(parts[1]), float(parts[2]))
    except ValueError:
        raise UsageError(f"--bound {text!r}: bounds must be numbers") from None


def load_config(path: Path) -> dict[str, Any]:
    """Read a config file; previous JSON outputs are accepted as-is."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if "manifest" in data:
        m = data["manifest"]
        data = {"parameters": m.get("parameters_user", {}), "axes": data.get("axes", m.get("axes", [])),
                "g_mode": m.get("g_mode")}
    params = data.get("parameters", {})
    for k in params:
        if k not in PARAMETER_FLAGS:
            raise UnknownParameter(f"unknown parameter {k!r} in config {path}")
    return data


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(subcommand=ns.subcommand)

    file_cfg = load_config(ns.config) if getattr(ns, "config", None) else {}
    params = {k: float(v) for k, v in file_cfg.get("parameters", {}).items() if v is not None}
    given = {name: getattr(ns, f"param_{name}", None) for name in PARAMETER_FLAGS}
    given = {k: v for k, v in given.items() if v is not None}
    if "h" in given and "Gamma_1" in given:
        raise UsageError("--h and --Gamma1 are mutually exclusive")
    # An explicit coupling on the command line replaces either form from the config.
    if "h" in given:
        params.pop("Gamma_1", None)
    if "Gamma_1" in given:
        params.pop("h", None)
    params.update(given)
    if "h" in params and "Gamma_1" in params:
        raise UsageError("config gives both h and Gamma_1")
    cfg.parameters = params

    axes = [_parse_axis(a) for a in getattr(ns, "axis", [])]
    if not axes and file_cfg.get("axes"):
        axes = [AxisSpec(**a) for a in file_cfg["axes"]]
    cfg.axes = axes

    cfg.out = getattr(ns, "out", None)
    cfg.format = getattr(ns, "format", "json")
    cfg.workers = getattr(ns, "workers", 1)
    if ns.subcommand == "sweep":
        cfg.flavor = ns.flavor
        cfg.g_mode = ns.g_mode or file_cfg.get("g_mode") or "fixed"
        if not cfg.axes:
            raise UsageError("sweep needs at least one --axis")
    elif ns.subcommand == "fig":
        cfg.figure = ns.figure
        cfg.flavor = FIGURES[ns.figure]["flavor"]
    elif ns.subcommand == "optimize":
        cfg.flavor = ns.flavor
        cfg.free = tuple(s.strip() for s in ns.free.split(",") if s.strip())
        for s in cfg.free:
            if s not in DEFAULT_BOUNDS:
                raise UnknownParameter(f"unknown free parameter {s!r}")
        cfg.bounds = dict(_parse_bound(b) for b in ns.bound)
    elif ns.subcommand == "verify":
        cfg.draws, cfg.seed = ns.draws, ns.seed
        if cfg.draws < 1:
            raise UsageError("--draws must be >= 1")
    elif ns.subcommand in ("bare", "cavity"):
        cfg.flavor = ns.subcommand

    if cfg.flavor == "bare" and ns.subcommand != "fig":
        cavity_only = [k for k in params if k not in BARE_PARAMETERS]
        if cavity_only:
            raise UsageError(f"cavity parameters {cavity_only} do not apply to a bare detector")
    return cfg


def resolve_user(flavor: str, user: dict[str, float], base: dict[str, float] | None = None) -> dict[str, float]:
    """Merge defaults, figure presets and explicit values (all ``/2pi`` units)."""
    merged = dict(DEFAULTS)
    merged.update(base or {})
    merged.update(user)
    if "Gamma_1" in user:
        merged.pop("h", None)
    if flavor == "bare":
        merged = {k: v for k, v in merged.items() if k in BARE_PARAMETERS}
    return merged


def params_from_user(flavor: str, user: dict[str, float]) -> BareParams:
    cls = BareParams if flavor == "bare" else CavityParams
    return cls.from_user(**user)


def build_manifest(cfg: RunConfig, user: dict[str, float], params: BareParams, started: float, **extra) -> dict[str, Any]:
    """Run record; ``parameters_user`` echoes the inputs exactly so they can be re-run."""
    return {
        "tool": "wgdetect",
        "version": __version__,
        "subcommand": cfg.subcommand,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": time.perf_counter() - started,
        "flavor": "cavity" if isinstance(params, CavityParams) else "bare",
        "parameters_user": user,
        "parameters_angular": params.angular_values(),
        **extra,
    }


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _emit_sweep(cfg: RunConfig, result: SweepResult, manifest: dict) -> None:
    manifest["axes"] = [a.to_dict() for a in result.axes]
    manifest["g_mode"] = result.g_mode
    manifest["degenerate_cells"] = result.n_degenerate
    if cfg.format == "json":
        payload = sweep_to_json(result, manifest)
        if cfg.out:
            write_json(payload, cfg.out)
        else:
            dump_json(payload, sys.stdout)
        return
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(result, fh)
        write_json(manifest, _manifest_path(cfg.out))
    else:
        write_csv(result, sys.stdout)
    if result.n_degenerate:
        print(f"warning: {result.n_degenerate} degenerate cells", file=sys.stderr)


def _emit_object(cfg: RunConfig, payload: dict) -> None:
    if cfg.out:
        write_json(payload, cfg.out)
    else:
        dump_json(payload, sys.stdout)


def run(cfg: RunConfig) -> int:
    started = time.perf_counter()
    sc = cfg.subcommand

    if sc in ("bare", "cavity"):
        user = resolve_user(sc, cfg.parameters)
        params = params_from_user(sc, user)
        report = detection(params)
        manifest = build_manifest(cfg, user, params, started)
        if cfg.format == "csv":
            if cfg.out:
                with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                    report_csv(report, fh)
                write_json(manifest, _manifest_path(cfg.out))
            else:
                report_csv(report, sys.stdout)
            return 0
        payload = {"manifest": manifest, "report": report_to_json(report)}
        if isinstance(params, CavityParams):
            payload["matching"] = matching_report(params).__dict__
        _emit_object(cfg, payload)
        return 0

    if sc == "sweep":
        user = resolve_user(cfg.flavor, cfg.parameters)
        params = params_from_user(cfg.flavor, user)
        try:
            result = sweep(params, cfg.axes, workers=cfg.workers, g_mode=cfg.g_mode)
        except InvalidAxis as exc:
            raise UsageError(str(exc)) from None
        _emit_sweep(cfg, result, build_manifest(cfg, user, params, started))
        return 0

    if sc == "fig":
        preset = FIGURES[cfg.figure]
        user = resolve_user(preset["flavor"], cfg.parameters, preset["base"])
        try:
            result = figure_sweep(cfg.figure, cfg.axes or None, workers=cfg.workers, **user)
        except InvalidAxis as exc:
            raise UsageError(str(exc)) from None
        manifest = build_manifest(
            cfg, user, result.base, started, figure=cfg.figure,
            figure_defaults={"base": preset["base"], "axes": [a.to_dict() for a in preset["axes"]],
                             "g_mode": preset.get("g_mode", "fixed")},
        )
        _emit_sweep(cfg, result, manifest)
        return 0

    if sc == "optimize":
        user = resolve_user(cfg.flavor, cfg.parameters)
        if cfg.flavor == "bare":
            opt = optimize_bare(user["gamma_q"], user["delta"], cfg.bounds.get("Gamma_1"))
        else:
            params = params_from_user("cavity", user)
            problem = OptimizationProblem.cavity(params, free=cfg.free, bounds=cfg.bounds)
            opt = optimize_cavity(problem, workers=cfg.workers)
        manifest = build_manifest(cfg, user, opt.params, started, free=list(opt.location))
        payload = {
            "manifest": manifest,
            "eta_max": opt.eta_max,
            "location": opt.location,
            "iterations": opt.iterations,
            "evaluations": opt.evaluations,
            "converged": opt.converged,
            "reason": opt.reason,
            "report": report_to_json(opt.report),
            "matching": opt.matching.__dict__ if opt.matching else None,
        }
        if cfg.out:
            write_json(payload, cfg.out)
        loc = ", ".join(f"{k}/2pi={v:.6f}" for k, v in opt.location.items())
        print(f"eta_max = {opt.eta_max:.6f} at {loc} ({opt.reason})")
        return 0

    if sc == "verify":
        summary = equivalence_run(cfg.draws, cfg.seed)
        ok = summary.max_deviation < VERIFY_TOLERANCE
        payload = {
            "draws": summary.draws,
            "seed": cfg.seed,
            "max_relative_deviation": summary.max_deviation,
            "max_scaled_residual": summary.max_residual,
            "tolerance": VERIFY_TOLERANCE,
            "passed": ok,
            "wall_time_s": time.perf_counter() - started,
        }
        if cfg.out:
            write_json(payload, cfg.out)
        print(f"verify: {summary.draws} draws x 2 flavors, max relative deviation "
              f"{summary.max_deviation:.3e} ({'PASS' if ok else 'FAIL'})")
        return 0 if ok else 1

    raise UsageError(f"unknown subcommand {sc!r}")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        return run(parse_args(argv))
    except UsageError as exc:
        print(f"wgdetect: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, DegenerateDenominator) as exc:
        print(f"wgdetect: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"wgdetect: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
