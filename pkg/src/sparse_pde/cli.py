"""Command-line front end: ``sparse-pde <command> [flags]``.

Every command writes plain CSV (or JSON) to stdout or ``--out``. Exit codes:
0 success, 2 usage error, 1 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np
from scipy.integrate import trapezoid

from . import asymptotics, scan
from .numerics import make_quadrature
from .priors import bigrid_spec, grid_spec, make_config
from .risk import (
    DEFAULT_QUAD_ORDER,
    ESTIMATORS,
    EstimatorKind,
    default_theta_max,
    plugin_density,
    predictive_density,
    prior_for,
)

PROG = "sparse-pde"
DEFAULT_Y_POINTS = 4096
DEFAULT_ETAS = "0.1,0.001,1e-10"
DEFAULT_RS = "1,0.5,0.25,0.1"


class UsageError(Exception):
    pass


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _json_num(x):
    if x is None:
        return None
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return None if math.isnan(x) else x


def _float_list(text, flag):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects a comma-separated list of numbers, got {text!r}")
    if not vals:
        raise UsageError(f"{flag} must not be empty")
    return vals


def _add_common(p, estimator=True, estimators=ESTIMATORS, default_estimator=None):
    p.add_argument("--eta", type=float, default=0.1, help="sparsity in (0, 1)")
    p.add_argument("--r", type=float, default=1.0, help="variance ratio v_y/v_x")
    if estimator:
        p.add_argument("--estimator", choices=estimators, default=default_estimator,
                       required=default_estimator is None)
        p.add_argument("--slab-l", type=float, default=None,
                       help="spike-and-slab half-width (default 5*lambda)")
    p.add_argument("--theta-max", type=float, default=None, help="scan end (default 5*lambda)")
    p.add_argument("--quad-order", type=int, default=DEFAULT_QUAD_ORDER)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=42)


def build_parser():
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("risk-curve", help="risk over a uniform theta grid")
    _add_common(p)
    p.add_argument("--points", type=int, default=scan.DEFAULT_POINTS)

    p = sub.add_parser("max-risk", help="maximum risk and its location")
    _add_common(p)
    p.set_defaults(format="json")
    p.add_argument("--points", type=int, default=scan.DEFAULT_POINTS)

    p = sub.add_parser("table1", help="maximum-risk ratios over an (eta, r) grid")
    _add_common(p, estimator=False)
    p.add_argument("--points", type=int, default=scan.DEFAULT_POINTS)
    p.add_argument("--etas", default=DEFAULT_ETAS)
    p.add_argument("--rs", default=DEFAULT_RS)

    p = sub.add_parser("sigma", help="dominant-risk surface sigma(l, omega)")
    _add_common(p, estimators=("grid", "bigrid"), default_estimator="grid")
    p.add_argument("--l-max", type=int, default=None)
    p.add_argument("--omega-steps", type=int, default=asymptotics.DEFAULT_OMEGA_STEPS)

    p = sub.add_parser("density", help="predictive density p_hat(y | x)")
    _add_common(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y-points", type=int, default=DEFAULT_Y_POINTS)

    p = sub.add_parser("prior", help="prior utilities")
    psub = p.add_subparsers(dest="prior_command", required=True)
    d = psub.add_parser("dump", help="constructed prior as JSON")
    _add_common(d, estimators=("grid", "bigrid", "ss", "point"))

    p = sub.add_parser("selftest", help="run the invariant battery")
    p.add_argument("--quad-order", type=int, default=DEFAULT_QUAD_ORDER)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None)
    return parser


def _resolve(args):
    """Validate flags and build config/kind/rule before any heavy computation."""
    out = {}
    if hasattr(args, "quad_order"):
        if args.quad_order < 8:
            raise UsageError(f"--quad-order must be >= 8, got {args.quad_order}")
        out["rule"] = make_quadrature(args.quad_order)
    if getattr(args, "points", None) is not None and args.points < scan.MIN_POINTS:
        raise UsageError(f"--points must be >= {scan.MIN_POINTS}, got {args.points}")
    if hasattr(args, "eta") and args.command != "table1":
        try:
            cfg = make_config(args.eta, args.r)
        except ValueError as exc:
            raise UsageError(str(exc))
        out["cfg"] = cfg
        est = getattr(args, "estimator", None)
        if est in ("grid", "bigrid") and cfg.eta >= 0.5:
            raise UsageError(f"--estimator {est} needs --eta < 0.5")
        if est is not None:
            slab_l = args.slab_l
            if est == "ss":
                slab_l = 5.0 * cfg.lam if slab_l is None else slab_l
                if not slab_l > 0:
                    raise UsageError(f"--slab-l must be positive, got {slab_l}")
            elif slab_l is not None:
                raise UsageError("--slab-l only applies to --estimator ss")
            out["kind"] = EstimatorKind(est, slab_l)
        theta_max = default_theta_max(cfg) if args.theta_max is None else args.theta_max
        if not (theta_max > 0 and math.isfinite(theta_max)):
            raise UsageError(f"--theta-max must be positive, got {theta_max}")
        out["theta_max"] = theta_max
    return out


def _write_csv(stream, header, rows, trailer=None):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    if trailer:
        stream.write(trailer + "\n")


def _write_json(stream, obj):
    stream.write(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def cmd_risk_curve(args, ctx, stream):
    curve = scan.risk_curve(ctx["kind"], ctx["cfg"], ctx["theta_max"], args.points, ctx["rule"], refine=False)
    cols = ("theta", "rho", "quad_term", "e_log_N", "e_log_D")
    data = list(zip(curve.thetas, curve.rhos, curve.quad_terms, curve.e_log_N, curve.e_log_D))
    if args.format == "json":
        _write_json(stream, [{k: _json_num(v) for k, v in zip(cols, row)} for row in data])
    else:
        _write_csv(stream, cols, data)


def cmd_max_risk(args, ctx, stream):
    curve = scan.risk_curve(ctx["kind"], ctx["cfg"], ctx["theta_max"], args.points, ctx["rule"])
    obj = {
        "eta": ctx["cfg"].eta,
        "r": ctx["cfg"].r,
        "estimator": ctx["kind"].name,
        "benchmark": curve.benchmark,
        "max_rho": curve.max_rho,
        "ratio": curve.ratio,
        "argmax_theta": curve.argmax_theta,
        "quad_order": ctx["rule"].order,
        "points": args.points,
    }
    if args.format == "json":
        _write_json(stream, obj)
    else:
        _write_csv(stream, list(obj), [list(obj.values())])


TABLE_COLUMNS = (
    "eta", "r", "benchmark",
    "plugin_ratio", "bigrid_ratio", "ss_ratio", "grid_ratio",
    "plugin_argmax", "bigrid_argmax", "ss_argmax", "grid_argmax",
)


def _table_record(row):
    rec = {"eta": row.eta, "r": row.r, "benchmark": row.benchmark}
    for name in row.COLUMNS:
        rec[f"{name}_ratio"] = getattr(row, name).ratio
    for name in row.COLUMNS:
        rec[f"{name}_argmax"] = getattr(row, name).argmax
    return rec


def cmd_table1(args, ctx, stream):
    etas = _float_list(args.etas, "--etas")
    rs = _float_list(args.rs, "--rs")
    for eta in etas:
        if not 0.0 < eta < 0.5:
            raise UsageError(f"--etas entries must lie in (0, 0.5), got {eta}")
    for r in rs:
        if not (r > 0 and math.isfinite(r)):
            raise UsageError(f"--rs entries must be positive, got {r}")
    rows = scan.table1(etas, rs, ctx["rule"], args.points)
    recs = [_table_record(row) for row in rows]
    if args.format == "json":
        _write_json(stream, recs)
    else:
        _write_csv(stream, TABLE_COLUMNS, [[rec[c] for c in TABLE_COLUMNS] for rec in recs])


def cmd_sigma(args, ctx, stream):
    cfg = ctx["cfg"]
    if args.omega_steps < 2:
        raise UsageError(f"--omega-steps must be >= 2, got {args.omega_steps}")
    if args.l_max is not None and args.l_max < 1:
        raise UsageError(f"--l-max must be >= 1, got {args.l_max}")
    spec = grid_spec(cfg) if args.estimator == "grid" else bigrid_spec(cfg)
    lat = asymptotics.sigma_arrays(cfg, spec, args.l_max, args.omega_steps)
    best = asymptotics.sigma_max(cfg, spec, args.l_max, args.omega_steps)
    h, h_plus = asymptotics.h_r(cfg.r)
    summary = {
        "prior": args.estimator,
        "b": spec.b,
        "K": spec.K,
        "max_sigma": best.sigma,
        "l": best.l,
        "omega": best.omega,
        "theta": best.theta,
        "lattice_max_sigma": float(lat["sigma"].max()),
        "h_r": h,
        "one_plus_h_plus": 1.0 + h_plus,
    }
    cols = ("l", "omega", "theta", "n", "n_check", "d", "sigma")
    data = list(zip(*(lat[c] for c in cols)))
    if args.format == "json":
        _write_json(stream, {"summary": summary,
                             "points": [{k: _json_num(v) for k, v in zip(cols, row)} for row in data]})
    else:
        _write_csv(stream, cols, data, "# " + json.dumps(summary))


def cmd_density(args, ctx, stream):
    cfg, kind = ctx["cfg"], ctx["kind"]
    if args.y_points < 2:
        raise UsageError(f"--y-points must be >= 2, got {args.y_points}")
    L = abs(args.x) + 10.0 * cfg.lam + 14.0
    y = np.linspace(-L, L, args.y_points)
    if kind.is_bayes:
        prior = prior_for(kind, cfg, max(ctx["theta_max"], abs(args.x) + 10.0 * cfg.lam))
        phat = predictive_density(prior, cfg, args.x, y)
    else:
        phat = plugin_density(cfg, args.x, y)
    integral = float(trapezoid(phat, y))
    if args.format == "json":
        _write_json(stream, {"x": args.x, "integral": integral, "y": y.tolist(), "phat": phat.tolist()})
    else:
        _write_csv(stream, ("y", "phat"), zip(y, phat), f"# integral={integral!r}")


def cmd_prior_dump(args, ctx, stream):
    cfg, kind = ctx["cfg"], ctx["kind"]
    prior = prior_for(kind, cfg, ctx["theta_max"])
    spec = None
    if kind.name == "grid":
        spec = grid_spec(cfg)
    elif kind.name == "bigrid":
        spec = bigrid_spec(cfg)
    _write_json(stream, prior.to_dict(spec))


def cmd_selftest(args, ctx, stream):
    from .selftest import run_selftest

    results = run_selftest(seed=args.seed, quad_order=args.quad_order)
    for res in results:
        stream.write(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail} [{res.seconds:.1f}s]\n")
    n_ok = sum(r.passed for r in results)
    stream.write(f"{n_ok}/{len(results)} checks passed\n")
    return 0 if n_ok == len(results) else 1


COMMANDS = {
    "risk-curve": cmd_risk_curve,
    "max-risk": cmd_max_risk,
    "table1": cmd_table1,
    "sigma": cmd_sigma,
    "density": cmd_density,
    "prior": cmd_prior_dump,
    "selftest": cmd_selftest,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    buf = io.StringIO()
    try:
        ctx = _resolve(args)
        code = COMMANDS[args.command](args, ctx, buf) or 0
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"{PROG}: numerical failure: {exc}", file=sys.stderr)
        return 1
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); silence the flush at exit
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())
    return code


if __name__ == "__main__":
    sys.exit(main())
