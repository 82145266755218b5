"""Command-line front end: ``mqd <box|double-slit|continuum-check|all> [options]``.

Exit codes: 0 when every check passes, 1 when a threshold is missed (the
report is still written), 2 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import re
import sys
from dataclasses import fields
from datetime import datetime
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import plots
from .analysis import RunReport
from .integrator import IntegrationError
from .scenarios import BOX, DOUBLE_SLIT, DensityProfile, ScenarioSpec, quantile_init

log = logging.getLogger("mqd")

SUBCOMMANDS = ("box", "double-slit", "continuum-check", "all")
DEFAULT_SIZES = (50, 100, 200, 400)
DEFAULT_MARGIN = 0.2
_TIME_UNITS = {"fs": 1e-3, "ps": 1.0, "ns": 1e3}
_LENGTH_UNITS = {"pm": 1e-3, "nm": 1.0, "um": 1e3}


class ConfigError(ValueError):
    pass


def _quantity(units: dict, default: str):
    pattern = re.compile(r"^\s*([-+0-9.eE]+)\s*([a-z]*)\s*$")

    def parse(text):
        if isinstance(text, (int, float)):
            return float(text)
        m = pattern.match(str(text))
        if not m or (m.group(2) and m.group(2) not in units):
            raise argparse.ArgumentTypeError(f"expected a number in {'/'.join(units)}, got {text!r}")
        try:
            value = float(m.group(1))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        return value * units[m.group(2) or default]
    return parse


parse_time = _quantity(_TIME_UNITS, "ps")
parse_length = _quantity(_LENGTH_UNITS, "nm")


def parse_sizes(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(s) for s in text)
    try:
        return tuple(int(s) for s in str(text).replace(" ", "").split(",") if s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _int(text) -> int:
    v = float(text)
    if v != int(v):
        raise ConfigError(f"not an integer: {text!r}")
    return int(v)


# config keys accepted in files and reports, with their parsers
_SPEC_PARSERS = {
    "n": _int, "length": parse_length, "half_separation": parse_length, "width": parse_length,
    "particles": _int, "duration": parse_time, "sample_every": parse_time, "boundary": str,
    "sigma_mode": str, "seeding": str, "mass": float, "dt_max": parse_time, "dt_safety": float,
    "energy_drift_tol": float,
}
_ALIASES = {"state": "n", "l": "length", "x": "half_separation", "sigma": "width", "n_particles": "particles"}
_META_KEYS = {"subcommand", "kind", "scenarios", "out", "plots", "sizes", "margin"}
assert set(_SPEC_PARSERS) == {f.name for f in fields(ScenarioSpec)} - {"kind"}


def load_config(path: str | os.PathLike) -> dict:
    """Flat key = value file (INI/TOML-like) or a report.json with a "config" key."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    raw: dict = {}
    if p.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON in {p}: {exc}") from None
        raw = data.get("config", data) if isinstance(data, dict) else None
        if not isinstance(raw, dict):
            raise ConfigError(f"{p} holds no config mapping")
    else:
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        if not text.lstrip().startswith("["):
            text = "[mqd]\n" + text
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"bad config {p}: {exc}") from None
        for section in cp.sections():
            for k, v in cp.items(section):
                raw[k] = v.strip().strip('"').strip("'")
    return normalize_config(raw)


def normalize_config(raw: dict) -> dict:
    out = {}
    for key, value in raw.items():
        k = key.strip().lower().replace("-", "_")
        k = _ALIASES.get(k, k)
        if k == "separation":
            out["half_separation"] = parse_length(value) / 2
        elif k in _SPEC_PARSERS:
            if value is None:
                continue
            try:
                out[k] = _SPEC_PARSERS[k](value)
            except (ValueError, TypeError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        elif k in _META_KEYS:
            if k == "sizes" and value is not None:
                out[k] = parse_sizes(value)
            elif k == "plots":
                out[k] = _bool(value)
            elif k == "margin":
                out[k] = float(value)
            elif k in ("subcommand", "out"):
                out[k] = value
            # kind and scenarios are informational
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mqd", description="Deterministic many-particle quantum dynamics")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="key=value file or a previous report.json")
    ap.add_argument("--state", type=int, dest="n", help="box eigenstate n >= 1")
    ap.add_argument("--length", type=parse_length, help="box length [nm]")
    ap.add_argument("--particles", type=int, help="number of particles N")
    ap.add_argument("--separation", type=parse_length, help="slit separation 2X [nm]")
    ap.add_argument("--width", type=parse_length, help="packet width sigma [nm]")
    ap.add_argument("--duration", type=parse_time, help="simulated time [ps]")
    ap.add_argument("--sample-every", type=parse_time, dest="sample_every", help="snapshot interval [ps]")
    ap.add_argument("--dt-max", type=parse_time, dest="dt_max", help="largest integrator step [ps]")
    ap.add_argument("--boundary", choices=("interior", "mirror"))
    ap.add_argument("--sigma-mode", choices=("density", "amplitude"), dest="sigma_mode")
    ap.add_argument("--seeding", choices=("quantile", "lobe"))
    ap.add_argument("--sizes", type=parse_sizes, help="comma-separated chain sizes for continuum-check")
    ap.add_argument("--out", help="output root (default $MQD_OUT or ./mqd_runs)")
    ap.add_argument("--plots", action="store_true", default=None, help="write SVG figures")
    ap.add_argument("-q", "--quiet", action="store_true")
    return ap


def resolve(args: argparse.Namespace) -> dict:
    """Merge config file and flags (flags win)."""
    cfg = load_config(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k not in ("config", "subcommand", "quiet", "separation")}
    if args.separation is not None:
        flags["half_separation"] = args.separation / 2
    cfg.update(flags)
    cfg["subcommand"] = args.subcommand
    cfg.setdefault("sizes", DEFAULT_SIZES)
    cfg.setdefault("margin", DEFAULT_MARGIN)
    cfg.setdefault("plots", False)
    cfg.setdefault("out", os.environ.get("MQD_OUT") or "mqd_runs")
    return cfg


def _spec(cfg: dict, kind: str, **kw) -> ScenarioSpec:
    values = {k: cfg[k] for k in _SPEC_PARSERS if k in cfg}
    values.update(kw)
    if kind == DOUBLE_SLIT:
        values.pop("n", None)
    return ScenarioSpec(kind=kind, **values).resolved()


def plan(cfg: dict) -> dict:
    """Validate everything up front; returns the scenario specs to run."""
    sub = cfg["subcommand"]
    specs = {}
    if sub == "box":
        specs["box"] = _spec(cfg, BOX)
    elif sub == "double-slit":
        specs["double-slit"] = _spec(cfg, DOUBLE_SLIT)
    elif sub == "all":
        for n in (1, 2, 3):
            specs[f"box-n{n}"] = _spec(cfg, BOX, n=n)
        specs["double-slit"] = _spec(cfg, DOUBLE_SLIT)
    if sub in ("continuum-check", "all"):
        sizes = cfg["sizes"]
        if len(sizes) < 3 or min(sizes) < 50 or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ConfigError("sizes must be >= 3 strictly increasing integers, each >= 50")
        if not 0 <= cfg["margin"] < 0.5:
            raise ConfigError("margin must lie in [0, 0.5)")
        if not cfg.get("width", 10.0) > 0:
            raise ConfigError("width must be positive")
    return specs


def make_run_dir(root: str | os.PathLike, sub: str) -> Path:
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    path = Path(root) / f"{sub}-{stamp}"
    try:
        path.mkdir(parents=True, exist_ok=False)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from None
    return path


def write_trajectory(path: Path, times, positions) -> None:
    positions = np.atleast_2d(positions)
    nt, n = positions.shape
    table = np.column_stack([np.repeat(times, n), np.tile(np.arange(n), nt), positions.ravel()])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t_ps,particle_index,x_nm\n")
        np.savetxt(fh, table, fmt=("%.17g", "%d", "%.17g"), delimiter=",")


def write_report(path: Path, rep: RunReport) -> None:
    d = rep.to_dict()
    d["passed"] = rep.passed
    path.write_text(json.dumps(d, indent=2) + "\n", encoding="utf-8")


def _run_box(spec, out: Path, want_plots: bool):
    r = ex.run_box(spec)
    write_trajectory(out / "trajectory.csv", r.trajectory.times, r.trajectory.positions)
    if want_plots:
        plots.box_trajectories([r], out)
        plots.box_energies([r], out)
    return r


def _run_double_slit(spec, out: Path, want_plots: bool):
    r = ex.run_double_slit(spec)
    write_trajectory(out / "trajectory.csv", r.trajectory.times, r.trajectory.positions)
    if want_plots:
        plots.double_slit(r, out)
    return r


def _run_continuum(cfg: dict, out: Path, want_plots: bool):
    sigma = cfg.get("width", 10.0)
    r = ex.run_continuum(cfg["sizes"], sigma, cfg["margin"])
    # the largest chain's layout stands in for a trajectory: one snapshot at t = 0
    x = quantile_init(DensityProfile.gaussian(sigma), cfg["sizes"][-1]).positions
    write_trajectory(out / "trajectory.csv", np.array([0.0]), x[None, :])
    if want_plots:
        plots.convergence(r, out)
    return r


def _continuum_config(cfg: dict) -> dict:
    return dict(width=cfg.get("width", 10.0), sizes=list(cfg["sizes"]), margin=cfg["margin"],
                profile="gaussian")


def execute(cfg: dict, specs: dict, out: Path) -> RunReport:
    sub, want = cfg["subcommand"], cfg["plots"]
    meta = dict(subcommand=sub, plots=want)
    if sub == "box":
        spec = specs["box"]
        rep = ex.box_report([_run_box(spec, out, want)])
        rep.config = dict(meta, **spec.to_dict())
    elif sub == "double-slit":
        spec = specs["double-slit"]
        rep = ex.double_slit_report(_run_double_slit(spec, out, want))
        rep.config = dict(meta, **spec.to_dict())
    elif sub == "continuum-check":
        rep = ex.continuum_report(_run_continuum(cfg, out, want))
        rep.config = dict(meta, **_continuum_config(cfg))
    else:
        parts, boxes = [], []
        for name, spec in specs.items():
            d = out / name
            d.mkdir()
            log.info("[%s] starting", name)
            if spec.kind == BOX:
                r = _run_box(spec, d, want)
                boxes.append(r)
                part = ex.box_report([r])
            else:
                part = ex.double_slit_report(_run_double_slit(spec, d, want))
            part.config = dict(meta, **spec.to_dict())
            write_report(d / "report.json", part)
            log.info("[%s] done, %s", name, "pass" if part.passed else "FAIL")
            parts.append(part)
        d = out / "continuum"
        d.mkdir()
        part = ex.continuum_report(_run_continuum(cfg, d, want))
        part.config = dict(meta, **_continuum_config(cfg))
        write_report(d / "report.json", part)
        parts.append(part)
        rep = ex.merge_reports(parts + [ex.box_report(boxes)])
        if want:
            plots.box_trajectories(boxes, out)
            plots.box_energies(boxes, out)
        overrides = {k: v for k, v in cfg.items() if k in _SPEC_PARSERS}
        rep.config = dict(meta, **overrides, **_continuum_config(cfg),
                          scenarios={k: s.to_dict() for k, s in specs.items()})
    return rep


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = resolve(args)
        specs = plan(cfg)
        out = make_run_dir(cfg["out"], cfg["subcommand"])
    except (ConfigError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"mqd: error: {exc}", file=sys.stderr)
        return 2
    try:
        rep = execute(cfg, specs, out)
    except IntegrationError as exc:
        rep = RunReport(config=dict(subcommand=cfg["subcommand"]), diagnostics=dict(error=str(exc)))
        rep.checks["integration"] = dict(passed=False, error=str(exc))
    write_report(out / "report.json", rep)
    for name, check in rep.checks.items():
        print(f"{'PASS' if check.get('passed') else 'FAIL'}  {name}")
    print(f"output: {out}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
