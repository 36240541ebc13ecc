"""Command-line front end.

Four subcommands around one flat key=value configuration:

    tcsync evolve  --config run.conf --out traj.csv
    tcsync extract --config run.conf --out coeffs.csv
    tcsync check   coeffs.csv [--set tol_mag=0.02]
    tcsync sweep   --config grid.conf --out grid.csv

Any key can be overridden on the command line with --set key=value
(repeatable).  Angles accept pi fractions ("pi/4", "2pi/3", "0.05pi").
Exit codes: 0 success, 1 run failed (truncation, norm drift, degenerate
couplings, all sweep cells failed, ...), 2 configuration or usage error,
3 negative check verdict.
"""
from __future__ import annotations

import argparse
import math
import re
import sys

import numpy as np

from . import __version__
from .analytic import (check_sync_blocks, extract_blocks, GroundCoeff,
                       load_coefficients_csv, save_coefficients_csv,
                       to_interaction_picture)
from .backend import backend_name
from .errors import ConfigError, TcsyncError
from .hamiltonian import Operators, SystemParams
from .hilbert import FockTruncation, prepare_initial
from .propagator import IntegratorConfig, evolve, save_trajectory_csv
from .sweep import SweepSpec, run_sweep

DOMINANCE_FRACTION = 0.05


def parse_angle(text: str) -> float:
    """Float or pi fraction: "pi/4", "-2pi/3", "0.05pi", "1.5", "0"."""
    s = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"([+-]?\d*\.?\d*)pi(?:/(\d+\.?\d*))?", s)
    if m:
        coef_s, denom_s = m.group(1), m.group(2)
        coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef_s)
        if coef is None:
            coef = float(coef_s)
        denom = float(denom_s) if denom_s else 1.0
        if denom == 0.0:
            raise ConfigError(f"zero denominator in angle {text!r}")
        return coef * math.pi / denom
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}") from None


def _parse_bool(text: str) -> bool:
    s = text.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


def _parse_floats(text: str) -> tuple:
    try:
        vals = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None
    if not vals:
        raise ConfigError(f"empty number list {text!r}")
    return vals


def _parse_axis(text: str) -> str:
    s = text.strip().lower()
    if s not in ("theta", "coupling"):
        raise ConfigError(f"axis must be 'theta' or 'coupling', got {text!r}")
    return s


def _wrap_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse number {text!r}") from None


def _wrap_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"cannot parse integer {text!r}") from None


# key -> (parser, default)
_REGISTRY = {
    "omega": (_wrap_float, 1.0),
    "omega_q1": (_wrap_float, 1.0),
    "omega_q2": (_wrap_float, 1.0),
    "g1": (_wrap_float, 0.04),
    "g2": (_wrap_float, 0.04),
    "alpha0": (_wrap_float, 0.0),
    "omega_d": (_wrap_float, 1.0),
    "tau": (_wrap_float, 500.0),
    "theta1": (parse_angle, math.pi / 4),
    "theta2": (parse_angle, 5 * math.pi / 12),
    "n_max": (_wrap_int, 64),
    "leakage_tol": (_wrap_float, 1e-9),
    "dt": (_wrap_float, 0.01),
    "sample_interval": (_wrap_float, 0.5),
    "t_end": (_wrap_float, 2000.0),
    "norm_tol": (_wrap_float, 1e-6),
    "renormalize": (_parse_bool, False),
    "auto_extend": (_parse_bool, False),
    "max_n_max": (_wrap_int, 4096),
    "t0": (_wrap_float, None),
    "min_population": (_wrap_float, 1e-12),
    "tol_mag": (_wrap_float, 0.02),
    "tol_phase": (parse_angle, 0.05 * math.pi),
    "axis": (_parse_axis, "theta"),
    "axis_values": (_parse_floats, (0.0,)),
    "alpha0_values": (_parse_floats, (0.05,)),
    "window_start": (_wrap_float, 500.0),
    "window": (_wrap_float, 1500.0),
}


def read_config_file(path) -> dict:
    raw = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                stripped = line.split("#", 1)[0].strip()
                if not stripped:
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, "
                                      f"got {line.strip()!r}")
                key, _, value = stripped.partition("=")
                raw[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return raw


def resolve_settings(config_path, overrides) -> dict:
    raw = read_config_file(config_path) if config_path else {}
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        raw[key.strip()] = value.strip()
    settings = {k: default for k, (_, default) in _REGISTRY.items()}
    for key, text in raw.items():
        if key not in _REGISTRY:
            raise ConfigError(f"unknown configuration key {key!r}")
        parser = _REGISTRY[key][0]
        settings[key] = parser(text)
    return settings


def _params(s: dict) -> SystemParams:
    return SystemParams(omega=s["omega"], omega_q1=s["omega_q1"],
                        omega_q2=s["omega_q2"], g1=s["g1"], g2=s["g2"],
                        alpha0=s["alpha0"], omega_d=s["omega_d"],
                        tau=s["tau"])


def _integrator(s: dict, t_end=None) -> IntegratorConfig:
    return IntegratorConfig(dt=s["dt"], sample_interval=s["sample_interval"],
                            t_end=t_end if t_end is not None else s["t_end"],
                            norm_tol=s["norm_tol"],
                            renormalize=s["renormalize"],
                            auto_extend=s["auto_extend"],
                            max_n_max=s["max_n_max"])


def _fmt_coeff(z: complex) -> str:
    return f"{abs(z):.4f} exp({np.angle(z) / math.pi:+.3f}i pi)"


def _print_config(s: dict) -> None:
    """Effective settings in the same key=value syntax the parser reads."""
    for key in sorted(s):
        val = s[key]
        if val is None:
            continue
        if isinstance(val, bool):
            text = "true" if val else "false"
        elif isinstance(val, tuple):
            text = ",".join(f"{v:.17g}" for v in val)
        elif isinstance(val, float):
            text = f"{val:.17g}"
        else:
            text = str(val)
        print(f"{key} = {text}")


def cmd_evolve(s: dict, args) -> int:
    params = _params(s)
    trunc = FockTruncation(s["n_max"], s["leakage_tol"])
    ops = Operators.build(params, trunc)
    initial = prepare_initial(s["theta1"], s["theta2"], trunc)
    traj = evolve(initial, _integrator(s), ops)
    out = args.out or "trajectory.csv"
    save_trajectory_csv(traj, out)
    print(f"evolved to t={s['t_end']:g} ({len(traj.times)} samples, "
          f"backend={backend_name()})")
    print(f"final <n>={traj.n[-1]:.6f} n_max_used={traj.n_max_used} "
          f"norm_drift={traj.norm_drift:.3e}")
    print(f"wrote {out}")
    return 0


def _state_at_t0(s: dict):
    params = _params(s)
    t0 = s["t0"] if s["t0"] is not None else params.tau
    if t0 < params.tau:
        print(f"error: extraction time t0={t0:g} precedes the drive "
              f"switch-off tau={params.tau:g}; the block forms only hold "
              f"after the drive stops", file=sys.stderr)
        return None, None, 2
    trunc = FockTruncation(s["n_max"], s["leakage_tol"])
    ops = Operators.build(params, trunc)
    initial = prepare_initial(s["theta1"], s["theta2"], trunc)
    traj = evolve(initial, _integrator(s, t_end=t0), ops)
    state_i = to_interaction_picture(traj.final_state, t0, params)
    return state_i, t0, 0


def cmd_extract(s: dict, args) -> int:
    state_i, t0, rc = _state_at_t0(s)
    if rc:
        return rc
    params = _params(s)
    coeffs = extract_blocks(state_i, t0, params, s["min_population"])
    out = args.out or "coefficients.csv"
    save_coefficients_csv(out, coeffs, params, t0)
    print(f"extracted {len(coeffs)} blocks at t0={t0:g} "
          f"(backend={backend_name()})")
    for blk in coeffs:
        fields = [f"block {blk.block}", f"weight {blk.weight:.5f}"]
        print("  " + "  ".join(fields))
    print(f"wrote {out}")
    return 0


def cmd_check(s: dict, args) -> int:
    try:
        coeffs, meta = load_coefficients_csv(args.coefficients)
    except (OSError, ValueError, KeyError, IndexError) as exc:
        raise ConfigError(f"cannot read coefficients "
                          f"{args.coefficients}: {exc}") from None
    verdicts = check_sync_blocks(coeffs, s["tol_mag"], s["tol_phase"])
    weights = {c.block: c.weight for c in coeffs
               if not isinstance(c, GroundCoeff)}
    top = max(weights.values(), default=0.0)
    locked_dominant = 0
    n_dominant = 0
    for v in verdicts:
        dominant = weights[v.block] >= DOMINANCE_FRACTION * top
        if dominant:
            n_dominant += 1
            if v.synchronized:
                locked_dominant += 1
        tag = "" if dominant else "  (minor)"
        res = "  ".join(f"{k}={val:.4f}" for k, val in v.residuals.items()
                        if not math.isnan(val))
        print(f"block {v.block}: {v.mechanism}  weight={weights[v.block]:.5f}"
              f"  {res}{tag}")
        for note in v.notes:
            print(f"    note: {note}")
    word = "synchronized" if locked_dominant else "not synchronized"
    print(f"overall: {word} ({locked_dominant}/{n_dominant} dominant blocks "
          f"locked, t0={meta['t0']:g})")
    return 0 if locked_dominant else 3


def cmd_sweep(s: dict, args) -> int:
    spec = SweepSpec(axis=s["axis"], axis_values=s["axis_values"],
                     alpha0_values=s["alpha0_values"], theta1=s["theta1"],
                     theta2=s["theta2"], params=_params(s),
                     integrator=_integrator(s), n_max=s["n_max"],
                     leakage_tol=s["leakage_tol"],
                     window_start=s["window_start"], window=s["window"])
    grid = run_sweep(spec, threads=args.threads, dump_dir=args.dump_dir)
    out = args.out or "sweep.csv"
    grid.to_csv(out)
    n_failed = int(np.sum(grid.status != "ok"))
    print(f"swept {grid.pearson.size} cells, {n_failed} failed "
          f"(backend={backend_name()})")
    for r in spec.axis_values:
        i = grid.row(r)
        row = grid.abs_pearson[i]
        if np.all(np.isnan(row)):
            print(f"  {spec.axis} r={r:+g}: no valid cells")
            continue
        best = grid.best_alpha0(r)
        print(f"  {spec.axis} r={r:+g}: best |C|={np.nanmax(row):.4f} "
              f"at alpha0={best:g}")
    print(f"wrote {out}")
    return 1 if n_failed == grid.pearson.size else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcsync",
        description="Driven two-qubit cavity simulations: propagation, "
                    "block-coefficient extraction, synchrony checks and "
                    "parameter sweeps.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("evolve", "integrate and write the sampled trajectory"),
            ("extract", "extract block coefficients at t0"),
            ("check", "classify per-block synchrony from a coefficient CSV"),
            ("sweep", "grid scan of the windowed correlation")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one configuration key")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--print-config", action="store_true",
                       help="print resolved settings and exit")
        if name == "check":
            p.add_argument("coefficients",
                           help="coefficient CSV written by extract")
        if name == "sweep":
            p.add_argument("--threads", type=int, default=1)
            p.add_argument("--dump-dir",
                           help="also write every cell trajectory here")
    return parser


_COMMANDS = {"evolve": cmd_evolve, "extract": cmd_extract,
             "check": cmd_check, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = resolve_settings(args.config, args.set)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if args.print_config:
        _print_config(settings)
        return 0
    try:
        return _COMMANDS[args.command](settings, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except TcsyncError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
