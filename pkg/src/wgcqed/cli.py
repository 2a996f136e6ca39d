"""Command-line front end: LDOS curves, cavity parameter sweeps and figure-of-merit sweeps.

Exit codes: 0 success, 1 numerical failure (at least one point), 2 usage or
configuration error.  All output is CSV with a ``#`` metadata header.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .config import PRESETS, echo, environment_from, load_config, structure_from
from .errors import ConfigError, NumericalError, PreconditionError
from .photonic import decompose_ldos, ldos_guided, limit_values
from .pipeline import METHODS, PointResult, fom_points

FMT = "%.10g"

PARAMS_COLUMNS = ["r1", "r2", "L_um", "gammaB_ueV", "Lc_ueV", "kappa_ueV", "g_ueV", "g_max_ueV",
                  "kappa_max_ueV", "kappa_tilde", "fit_residual", "status"]
FOM_COLUMNS = ["r2", "T", "g_ueV", "kappa_ueV", "I_numeric", "I_analytic", "E_numeric", "E_analytic",
               "F", "P_B", "P_R", "t", "F_analytic", "L_um", "status"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple
    method: str = "both"
    target: str = "fom"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if self.param not in ("r", "T", "L"):
            raise UsageError(f"cannot sweep {self.param!r}; choose r, T or L")
        if self.target not in ("params", "fom"):
            raise UsageError("target must be 'params' or 'fom'")
        if self.method not in METHODS:
            raise UsageError(f"method must be one of {METHODS}")
        if v.size == 0:
            raise UsageError("empty sweep grid")
        if not np.all(np.isfinite(v)) or np.any(np.diff(v) <= 0):
            raise UsageError("sweep grid must be finite and strictly increasing")
        if self.param == "r" and (v[0] < 0 or v[-1] >= 1):
            raise UsageError("r grid must lie in [0, 1)")
        if self.param == "T" and (v[0] <= 0 or v[-1] > 1):
            raise UsageError("T grid must lie in (0, 1]")
        if self.param == "L" and v[0] <= 0:
            raise UsageError("L grid must be positive")


def parse_grid(text: str) -> tuple:
    """``a:b:n`` (linear), ``a:b:n:log`` (logarithmic) or a comma list."""
    text = (text or "").strip()
    if not text:
        return ()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("lin", "log")):
                raise UsageError(f"bad grid {text!r}; use a:b:n or a:b:n:log")
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 0:
                raise UsageError("grid point count must be >= 0")
            if len(parts) == 4 and parts[3] == "log":
                if a <= 0 or b <= 0:
                    raise UsageError("logarithmic grid needs positive bounds")
                return tuple(np.logspace(math.log10(a), math.log10(b), n))
            return tuple(np.linspace(a, b, n))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return "nan"
    return FMT % x


def write_csv(out, header: list[str], columns: list[str], rows) -> None:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as f:
            f.write(text)


def _header(command: str, cfg: dict, extra: dict) -> list[str]:
    lines = [f"wgcqed {__version__}", f"command = {command}"]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    return lines + echo(cfg)


def cmd_ldos(cfg: dict, args) -> int:
    structure = structure_from(cfg)
    if args.points < 2 or args.span <= 0:
        raise UsageError("ldos needs --points >= 2 and --span > 0")
    x = np.linspace(-0.5 * args.span, 0.5 * args.span, args.points)
    omega = structure.omega_c + x * structure.fsr
    rho = ldos_guided(structure, omega)
    rows = zip(omega, rho, x)
    write_csv(args.out, _header("ldos", cfg, {"span_fsr": args.span, "points": args.points}),
              ["omega_ueV", "ldos_ueV", "omega_fsr"], rows)
    return 0


def _params_row(structure) -> tuple[list, bool]:
    base = [structure.mirror1.r, structure.mirror2.r, structure.L]
    try:
        p = decompose_ldos(structure)
    except (NumericalError, PreconditionError) as exc:
        g_max, kappa_max = limit_values(structure)
        return base + [math.nan] * 4 + [g_max, kappa_max, math.nan, math.nan,
                                        f"{type(exc).__name__}: {exc}"], False
    return base + [p.gammaB, p.Lc, p.kappa, p.g, p.g_max, p.kappa_max, p.kappa_tilde,
                   p.fit_residual, "ok"], True


def _fom_row(res: PointResult, L: float) -> list:
    nan = math.nan
    p, n, a = res.params, res.numeric, res.analytic
    primary = n if n is not None else a
    return [res.r2, res.T, p.g if p else nan, p.kappa if p else nan,
            n.I if n else nan, a.I if a else nan, n.E if n else nan, a.E if a else nan,
            primary.F if primary else nan, primary.P_B if primary else nan, primary.P_R if primary else nan,
            math.sqrt(res.T), a.F if a else nan, L, "ok" if res.ok else res.error]


def _report(failures: list[str]) -> int:
    for f in failures:
        print(f"failed: {f}", file=sys.stderr)
    return 1 if failures else 0


def run_sweep(cfg: dict, spec: SweepSpec, out, workers: int = 1, command: str = "sweep") -> int:
    base = structure_from(cfg)
    header = _header(command, cfg, {"param": spec.param, "target": spec.target, "method": spec.method,
                                    "points": len(spec.values)})
    failures = []
    if spec.target == "params":
        structures = []
        for v in spec.values:
            if spec.param == "r":
                structures.append(base.with_mirrors(v, v))
            elif spec.param == "T":
                r = math.sqrt(1.0 - v)
                structures.append(base.with_mirrors(r, r))
            else:
                structures.append(replace(base, L=v))
        rows = []
        for v, s in zip(spec.values, structures):
            row, ok = _params_row(s)
            rows.append(row)
            if not ok:
                failures.append(f"{spec.param} = {FMT % v}: {row[-1]}")
        write_csv(out, header, PARAMS_COLUMNS, rows)
        return _report(failures)

    env = environment_from(cfg)
    structures = []
    for v in spec.values:
        if spec.param == "T":
            structures.append(base.with_mirrors(1.0, math.sqrt(1.0 - v)))
        elif spec.param == "r":
            structures.append(base.with_mirrors(1.0, v))
        else:
            structures.append(replace(base, L=v).with_mirrors(1.0, base.mirror2.r))
    results = fom_points(structures, env, spec.method, cfg["n_max"], workers)
    rows = []
    for v, s, res in zip(spec.values, structures, results):
        rows.append(_fom_row(res, s.L))
        if not res.ok:
            failures.append(f"{spec.param} = {FMT % v}: {res.error}")
    write_csv(out, header, FOM_COLUMNS, rows)
    return _report(failures)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--out", help="output CSV (default stdout)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration key (repeatable)")

    p = argparse.ArgumentParser(prog="wgcqed", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"wgcqed {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ldos", parents=[common], help="guided LDOS versus frequency")
    s.add_argument("--span", type=float, default=2.0, help="frequency window in FSR units")
    s.add_argument("--points", type=int, default=801)

    s = sub.add_parser("params", parents=[common], help="g, kappa versus symmetric mirror reflectivity")
    s.add_argument("--grid", default="0:0.99:100", help="r grid (a:b:n, a:b:n:log or a,b,...)")

    for name, help_ in (("fom", "efficiency and indistinguishability versus output transmission"),
                        ("sweep", "general sweep over r, T or L")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--method", choices=METHODS, default="both")
        s.add_argument("--workers", type=int, default=1)
        if name == "fom":
            s.add_argument("--grid", default="1e-3:1:60:log", help="T grid")
        else:
            s.add_argument("--param", choices=("r", "T", "L"), required=True)
            s.add_argument("--grid", required=True)
            s.add_argument("--target", choices=("params", "fom"),
                           help="default: fom for T, params for r and L")
    return p


def _overrides(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, args.preset, _overrides(args.set))
        if args.command == "ldos":
            return cmd_ldos(cfg, args)
        if args.command == "params":
            spec = SweepSpec("r", parse_grid(args.grid), target="params")
            return run_sweep(cfg, spec, args.out, command="params")
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        if args.command == "fom":
            spec = SweepSpec("T", parse_grid(args.grid), args.method, "fom")
        else:
            target = args.target or ("fom" if args.param == "T" else "params")
            spec = SweepSpec(args.param, parse_grid(args.grid), args.method, target)
        return run_sweep(cfg, spec, args.out, args.workers, command=args.command)
    except (UsageError, ConfigError) as exc:
        print(f"wgcqed: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, PreconditionError) as exc:
        print(f"wgcqed: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
