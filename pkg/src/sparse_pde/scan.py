"""Risk curves over [0, theta_max], their maxima, and the maximum-risk table."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .asymptotics import benchmark_univariate
from .numerics import make_quadrature
from .priors import make_config
from .risk import DEFAULT_QUAD_ORDER, EstimatorKind, default_theta_max, prior_for, risk_components

DEFAULT_POINTS = 2048
MIN_POINTS = 64
REFINE_XTOL = 1e-7
TABLE_ETAS = (0.1, 0.001, 1e-10)
TABLE_RS = (1.0, 0.5, 0.25, 0.1)
SS_WIDTH_LAMBDAS = 5.0


@dataclass(frozen=True)
class RiskCurve:
    kind: EstimatorKind
    cfg: object
    thetas: np.ndarray
    rhos: np.ndarray
    quad_terms: np.ndarray
    e_log_N: np.ndarray
    e_log_D: np.ndarray
    max_rho: float
    argmax_theta: float
    coarse_max_rho: float
    benchmark: float
    quad_order: int

    @property
    def ratio(self):
        return self.max_rho / self.benchmark

    @property
    def theta_max(self):
        return float(self.thetas[-1])


def _refine(f, lo, hi, x0, f0):
    """Local maximum of f on [lo, hi]; falls back to (x0, f0) if that is higher."""
    if hi - lo <= REFINE_XTOL:
        return x0, f0
    res = minimize_scalar(lambda t: -f(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": REFINE_XTOL})
    x, fx = float(res.x), -float(res.fun)
    for edge in (lo, hi):
        fe = f(edge)
        if fe > fx:
            x, fx = edge, fe
    if fx > f0:
        return x, fx
    return x0, f0


def risk_curve(kind, cfg, theta_max=None, n_points=DEFAULT_POINTS, rule=None, refine=True):
    """Risk on a uniform grid over [0, theta_max] with the maximum refined locally.

    Only theta >= 0 is scanned since every estimator here is symmetric. The
    coarse argmax takes the smallest theta among ties; refinement searches the
    two grid cells around it.
    """
    n_points = int(n_points)
    if n_points < MIN_POINTS:
        raise ValueError(f"n_points must be >= {MIN_POINTS}, got {n_points}")
    if theta_max is None:
        theta_max = default_theta_max(cfg)
    theta_max = float(theta_max)
    if not theta_max > 0.0:
        raise ValueError(f"theta_max must be positive, got {theta_max}")
    rule = rule or make_quadrature(DEFAULT_QUAD_ORDER)
    prior = prior_for(kind, cfg, theta_max) if kind.is_bayes else None

    thetas = np.linspace(0.0, theta_max, n_points)
    quad, e_n, e_d, rho = risk_components(kind, cfg, thetas, rule, theta_max, prior)
    i = int(np.argmax(rho))
    coarse = float(rho[i])
    x, fx = float(thetas[i]), coarse
    if refine:
        def f(t):
            return float(risk_components(kind, cfg, [t], rule, theta_max, prior)[3][0])

        lo = float(thetas[max(i - 1, 0)])
        hi = float(thetas[min(i + 1, n_points - 1)])
        x, fx = _refine(f, lo, hi, x, fx)
    return RiskCurve(
        kind=kind,
        cfg=cfg,
        thetas=thetas,
        rhos=rho,
        quad_terms=quad,
        e_log_N=e_n,
        e_log_D=e_d,
        max_rho=fx,
        argmax_theta=x,
        coarse_max_rho=coarse,
        benchmark=benchmark_univariate(cfg),
        quad_order=rule.order,
    )


@dataclass(frozen=True)
class TableCell:
    max_rho: float
    ratio: float
    argmax: float


@dataclass(frozen=True)
class TableRow:
    eta: float
    r: float
    benchmark: float
    plugin: TableCell
    bigrid: TableCell
    ss: TableCell
    grid: TableCell

    COLUMNS = ("plugin", "bigrid", "ss", "grid")


def table_kinds(cfg):
    """Estimators of one table row; the slab half-width is 5 lam of that row."""
    return {
        "plugin": EstimatorKind.plugin(),
        "bigrid": EstimatorKind.bigrid(),
        "ss": EstimatorKind.spike_slab(SS_WIDTH_LAMBDAS * cfg.lam),
        "grid": EstimatorKind.grid(),
    }


def table_row(eta, r, rule=None, n_points=DEFAULT_POINTS):
    cfg = make_config(eta, r)
    cells = {}
    for name, kind in table_kinds(cfg).items():
        c = risk_curve(kind, cfg, n_points=n_points, rule=rule)
        cells[name] = TableCell(c.max_rho, c.ratio, c.argmax_theta)
    return TableRow(eta=cfg.eta, r=cfg.r, benchmark=benchmark_univariate(cfg), **cells)


def table1(etas=TABLE_ETAS, rs=TABLE_RS, rule=None, n_points=DEFAULT_POINTS):
    """One row per (eta, r), etas outermost."""
    etas, rs = list(etas), list(rs)
    if not etas or not rs:
        raise ValueError("etas and rs must be nonempty")
    return [table_row(eta, r, rule, n_points) for eta in etas for r in rs]
