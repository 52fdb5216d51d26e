"""Command-line front end.

Every artifact embeds the run configuration (JSON field or CSV header
comment) so runs are self-describing and replayable.  Exit codes:
0 success, 1 configuration error, 2 numerical domain error (collision),
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .kepler import ModelParams, ephemeris
from .model import CollisionError, ExtendedState
from .integrate import integrate_orbit
from .floquet import classify, monodromy
from .general_model import bound_report, load_curve_pair, sitnikov_pair
from .scan import eps_scan_origin, find_transitions, interchange_census, trace_curve
from .poincare import section
from . import verification

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DOMAIN = 2
EXIT_VERIFY = 3


class ConfigError(ValueError):
    """Invalid run configuration; the message names the failing constraint."""


def parse_grid(text: str) -> np.ndarray:
    """Parse ``lo:hi:step`` into an inclusive grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r} is not of the form lo:hi:step")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from None
    if step <= 0.0 or hi < lo:
        raise ConfigError(f"grid {text!r}: need lo <= hi and step > 0")
    n = int(math.floor((hi - lo) / step + 0.5 * 1e-9)) + 1
    grid = lo + step * np.arange(n)
    if grid[-1] < hi - 1e-9 * step:
        grid = np.append(grid, hi)
    return grid


def parse_qstar(text: str) -> float:
    if text in ("0", "0.0"):
        return 0.0
    if text.lower() in ("pi", "3.141592653589793"):
        return math.pi
    raise ConfigError(f"qstar must be 0 or pi, got {text!r}")


def _params(args) -> ModelParams:
    try:
        return ModelParams(r=args.r, epsilon=args.eps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _config_json(args) -> str:
    cfg = {k: v for k, v in vars(args).items() if k != "func" and v is not None}
    return json.dumps(cfg, default=str, sort_keys=True)


def _write_json(path: str | None, payload: dict, args) -> None:
    payload = {"config": json.loads(_config_json(args)), **payload}
    text = json.dumps(payload, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_kepler(args) -> int:
    if not 0.0 <= args.eps < 1.0:
        raise ConfigError(f"eps={args.eps} outside [0, 1)")
    params = ModelParams(r=args.r, epsilon=args.eps)
    grid = parse_grid(args.t)
    lines = ["t,u,rho,x1x,x1y,x1z,x2x,x2y,x2z"]
    for t in grid:
        e = ephemeris(float(t), params)
        row = [e.t, e.u, e.rho, *e.x1, *e.x2]
        lines.append(",".join(f"{v:.17g}" for v in row))
    text = f"# {_config_json(args)}\n" + "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _params(args)
    method = "fixed" if args.fixed_step else "adaptive"
    traj = integrate_orbit(ExtendedState(q=args.q0, p=args.p0, s=args.s0),
                           args.t_final, params, tol=args.tol, method=method,
                           fixed_steps=args.fixed_step)
    traj.to_csv(args.out or sys.stdout, header_comment=_config_json(args))
    if traj.truncated:
        print("warning: trajectory truncated by collision guard",
              file=sys.stderr)
    return EXIT_OK


def cmd_floquet(args) -> int:
    params = _params(args)
    period = None
    if args.period:
        period = math.pi if args.period == "pi" else 2.0 * math.pi
    m = monodromy(parse_qstar(args.qstar), params, period=period,
                  tol=args.tol)
    verdict = classify(m, delta_par=args.delta_par)
    _write_json(args.out, verdict.to_json_dict(), args)
    return EXIT_OK


def cmd_scan(args) -> int:
    params_grid = parse_grid(args.r_grid)
    curve = trace_curve(parse_qstar(args.qstar), args.eps, params_grid,
                        tol=args.tol)
    if args.out_csv:
        curve.to_csv(args.out_csv, header_comment=_config_json(args))
    intervals = find_transitions(curve, refine_tol=args.refine_tol)
    _write_json(args.out_json, intervals.to_json_dict(), args)
    return EXIT_OK


def cmd_census(args) -> int:
    result = interchange_census(args.eps, args.ceiling_fraction, args.budget,
                                r_start_fraction=args.start_fraction,
                                tol=args.tol)
    _write_json(args.out, result.to_json_dict(), args)
    return EXIT_OK


def cmd_eps_scan(args) -> int:
    grid = parse_grid(args.eps_grid)
    curve = eps_scan_origin(args.r, grid, tol=args.tol)
    curve.to_csv(args.out or sys.stdout, header_comment=_config_json(args))
    return EXIT_OK


def cmd_poincare(args) -> int:
    params = _params(args)
    q_grid = parse_grid(args.q_grid)
    p_grid = parse_grid(args.p_grid)
    grid = [(float(q), float(p)) for q in q_grid for p in p_grid]
    method = "fixed" if args.fixed_step else "adaptive"
    cloud = section(params, grid, n_iterates=args.iterates, tol=args.tol,
                    method=method,
                    fixed_steps_per_period=args.fixed_step or 200)
    cloud.to_csv(args.out, header_comment=_config_json(args))
    if args.manifest:
        _write_json(args.manifest, cloud.manifest(), args)
    return EXIT_OK


def cmd_bounds(args) -> int:
    if args.curve_file:
        pair = load_curve_pair(args.curve_file)
    else:
        pair = sitnikov_pair(_params(args))
    lams = ([float(v) for v in args.lam.split(",")] if args.lam
            else [pair.default_lam])
    reports = [bound_report(lam, pair).to_json_dict() for lam in lams]
    _write_json(args.out, {"pair": pair.name, "reports": reports}, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verification.run_all(quick=args.quick)
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed",
              file=sys.stderr)
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="curved-sitnikov",
        description=("Simulation and Floquet stability analysis of a "
                     "massless particle on a circle driven by a Keplerian "
                     "binary"))
    sub = ap.add_subparsers(dest="command", required=True)

    def add_params(p, r_default=1.0):
        p.add_argument("--r", type=float, default=r_default,
                       help="binary semi-major axis")
        p.add_argument("--eps", type=float, default=0.0,
                       help="binary eccentricity")

    p = sub.add_parser("kepler", help="ephemeris table of the primaries")
    add_params(p)
    p.add_argument("--t", default="0:6.283185307179586:0.1",
                   help="time grid lo:hi:step")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_kepler)

    p = sub.add_parser("simulate", help="integrate one orbit to CSV")
    add_params(p)
    p.add_argument("--q0", type=float, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--s0", type=float, default=0.0)
    p.add_argument("--t-final", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--fixed-step", type=int, default=None,
                   help="use the reproducible RK4 engine with N steps")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("floquet", help="stability verdict at an equilibrium")
    add_params(p)
    p.add_argument("--qstar", required=True, help="0 or pi")
    p.add_argument("--period", choices=["pi", "2pi"], default=None)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--delta-par", type=float, default=1e-9)
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_floquet)

    p = sub.add_parser("scan", help="half-trace curve and transitions over r")
    p.add_argument("--qstar", required=True, help="0 or pi")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--r", dest="r_grid", required=True,
                   help="r grid lo:hi:step")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--refine-tol", type=float, default=1e-7)
    p.add_argument("--out-csv", help="trace CSV path")
    p.add_argument("--out-json", help="intervals JSON path (default stdout)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("census", help="count interchanges toward the ceiling")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--ceiling-fraction", type=float, default=0.99975)
    p.add_argument("--start-fraction", type=float, default=0.95)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("eps-scan", help="origin half-trace versus eccentricity")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--eps-grid", dest="eps_grid", required=True,
                   help="eps grid lo:hi:step")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_eps_scan)

    p = sub.add_parser("poincare", help="stroboscopic section cloud")
    add_params(p)
    p.add_argument("--q-grid", default="-0.4:0.4:0.1",
                   help="initial q grid lo:hi:step")
    p.add_argument("--p-grid", default="-0.3:0.3:0.1",
                   help="initial p grid lo:hi:step")
    p.add_argument("--iterates", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--fixed-step", type=int, default=None,
                   help="reproducible RK4 engine, steps per period")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--manifest", help="companion manifest JSON path")
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("bounds", help="closest-approach window report")
    add_params(p, r_default=1.8)
    p.add_argument("--curve-file", help="declarative curve-pair JSON")
    p.add_argument("--lam", help="comma-separated lambda values")
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--quick", action="store_true",
                   help="skip the multi-minute checks")
    p.set_defaults(func=cmd_verify)

    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except CollisionError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
