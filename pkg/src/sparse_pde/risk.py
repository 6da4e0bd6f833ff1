"""KL risk of sparse Bayes predictive densities and of the hard-threshold plug-in.

For a sparse prior the risk splits as

    rho(theta) = theta^2/(2r) - E log N_{theta,v}(Z) + E log D_theta(Z),

with D_theta = N_{theta,1} and Z ~ N(0, 1). Every N/D evaluation is a
log-sum-exp over the atoms (and slab), with the leading "1" entering as a
zero exponent.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .numerics import (
    LOG_SQRT_2PI,
    gauss_expect,
    log_interval_prob,
    log_interval_prob_array,
    make_quadrature,
    truncated_second_moment,
)
from .oracles import mc_expect
from .priors import bigrid_prior, grid_prior, point_prior, spike_slab_prior

DEFAULT_QUAD_ORDER = 1024
# Priors are built to cover the scan range plus this many multiples of lam.
PRIOR_REACH_LAMBDAS = 2.0
SLAB_PANELS = 10
SLAB_PANEL_NODES = 20

ESTIMATORS = ("grid", "bigrid", "ss", "plugin", "point")


@dataclass(frozen=True)
class EstimatorKind:
    """One of grid, bigrid, ss (needs ``slab_l``), plugin, point."""

    name: str
    slab_l: Optional[float] = None

    def __post_init__(self):
        if self.name not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.name!r}; expected one of {ESTIMATORS}")
        if self.name == "ss":
            if self.slab_l is None or not self.slab_l > 0:
                raise ValueError("spike-and-slab needs a positive slab half-width")
        elif self.slab_l is not None:
            raise ValueError(f"slab_l only applies to 'ss', not {self.name!r}")

    @classmethod
    def grid(cls):
        return cls("grid")

    @classmethod
    def bigrid(cls):
        return cls("bigrid")

    @classmethod
    def spike_slab(cls, l):
        return cls("ss", float(l))

    @classmethod
    def plugin(cls):
        return cls("plugin")

    @classmethod
    def point(cls):
        return cls("point")

    @property
    def is_bayes(self):
        return self.name != "plugin"

    def __str__(self):
        return f"ss[l={self.slab_l:g}]" if self.name == "ss" else self.name


@dataclass(frozen=True)
class RiskBreakdown:
    theta: float
    quad_term: float
    e_log_N: Optional[float]
    e_log_D: Optional[float]
    rho: float
    quad_err: float


def default_theta_max(cfg):
    return 5.0 * cfg.lam


def prior_for(kind, cfg, theta_max=None):
    """The prior behind a Bayes estimator, truncated to cover ``[0, theta_max]``."""
    if not kind.is_bayes:
        raise ValueError("the plug-in estimator has no prior")
    if kind.name == "point":
        return point_prior()
    if kind.name == "ss":
        return spike_slab_prior(cfg.eta, kind.slab_l)
    if theta_max is None:
        theta_max = default_theta_max(cfg)
    reach = theta_max + PRIOR_REACH_LAMBDAS * cfg.lam
    if kind.name == "grid":
        return grid_prior(cfg, reach)
    return bigrid_prior(cfg, reach)[0]


def _check_variance(cfg, variance):
    variance = float(variance)
    if variance == 1.0 or abs(variance - cfg.v) <= 1e-14 * cfg.v:
        return variance
    raise ValueError(f"variance must be v={cfg.v} or 1, got {variance}")


def _kernel_args(prior):
    return (
        np.ascontiguousarray(prior.mu),
        np.ascontiguousarray(prior.log_ratio),
        prior.slab_log_coef,
        prior.slab_half_width,
    )


def log_N(prior, cfg, theta, variance, z):
    """log N_{theta,variance}(z); ``z`` may be a scalar or an array."""
    variance = _check_variance(cfg, variance)
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    mu, logw, slab_logc, slab_l = _kernel_args(prior)
    out = _kernels.log_n_values(float(theta), zz, mu, logw, slab_logc, slab_l, variance)
    if not np.all(np.isfinite(out)):
        raise RuntimeError(f"non-finite log N at theta={theta}")
    return float(out[0]) if np.ndim(z) == 0 else out


def e_log_N_curve(prior, cfg, thetas, variance, rule):
    """E log N_{theta,variance}(Z) for every theta in ``thetas`` (no error estimate)."""
    variance = _check_variance(cfg, variance)
    thetas = np.ascontiguousarray(np.atleast_1d(thetas), dtype=float)
    mu, logw, slab_logc, slab_l = _kernel_args(prior)
    out = _kernels.e_log_n(thetas, rule.nodes, rule.weights, mu, logw, slab_logc, slab_l, variance)
    if not np.all(np.isfinite(out)):
        raise RuntimeError("non-finite E log N in risk kernel")
    return out


def e_log_N(prior, cfg, theta, variance, rule):
    """(E log N_{theta,variance}(Z), |difference to the doubled-order rule|)."""
    value = float(e_log_N_curve(prior, cfg, [theta], variance, rule)[0])
    fine = float(e_log_N_curve(prior, cfg, [theta], variance, make_quadrature(2 * rule.order))[0])
    return value, abs(value - fine)


def rho_plugin(cfg, theta):
    """Closed-form risk of the plug-in N(x 1{|x| > lam/sqrt(v)}, r).

    With tau = lam/sqrt(v) and P = P(|theta + Z| <= tau):
    rho = {theta^2 P + 1 - int_{-tau-theta}^{tau-theta} z^2 phi(z) dz} / (2r).
    Arrays are mapped elementwise.
    """
    if np.ndim(theta):
        flat = [rho_plugin(cfg, t) for t in np.ravel(theta)]
        return np.array(flat).reshape(np.shape(theta))
    theta = float(theta)
    tau = cfg.lam / math.sqrt(cfg.v)
    a, b = -tau - theta, tau - theta
    inside = math.exp(log_interval_prob(a, b))
    return (theta * theta * inside + 1.0 - truncated_second_moment(a, b)) / (2.0 * cfg.r)


def risk_components(kind, cfg, thetas, rule=None, theta_max=None, prior=None):
    """Arrays (quad_term, e_log_N, e_log_D, rho) over ``thetas``.

    For the plug-in the two expectation arrays are NaN.
    """
    rule = rule or make_quadrature(DEFAULT_QUAD_ORDER)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    quad = thetas * thetas / (2.0 * cfg.r)
    if not kind.is_bayes:
        nan = np.full_like(thetas, np.nan)
        return quad, nan, nan.copy(), np.atleast_1d(rho_plugin(cfg, thetas))
    if prior is None:
        if theta_max is None:
            theta_max = max(default_theta_max(cfg), float(np.max(np.abs(thetas))))
        prior = prior_for(kind, cfg, theta_max)
    e_n = e_log_N_curve(prior, cfg, thetas, cfg.v, rule)
    e_d = e_log_N_curve(prior, cfg, thetas, 1.0, rule)
    return quad, e_n, e_d, quad - e_n + e_d


def risk(kind, cfg, theta, rule=None, theta_max=None):
    """Full risk breakdown at one theta, with a doubled-order error estimate."""
    rule = rule or make_quadrature(DEFAULT_QUAD_ORDER)
    theta = float(theta)
    quad = theta * theta / (2.0 * cfg.r)
    if not kind.is_bayes:
        return RiskBreakdown(theta, quad, None, None, rho_plugin(cfg, theta), 0.0)
    if theta_max is None:
        theta_max = max(default_theta_max(cfg), abs(theta))
    prior = prior_for(kind, cfg, theta_max)
    e_n, err_n = e_log_N(prior, cfg, theta, cfg.v, rule)
    e_d, err_d = e_log_N(prior, cfg, theta, 1.0, rule)
    return RiskBreakdown(theta, quad, e_n, e_d, quad - e_n + e_d, err_n + err_d)


def _slab_rule(l):
    x, w = np.polynomial.legendre.leggauss(SLAB_PANEL_NODES)
    edges = np.linspace(0.0, l, SLAB_PANELS + 1)
    half = 0.5 * np.diff(edges)
    nodes = (edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def bayes_risk(prior, cfg, rule=None):
    """Prior-averaged risk of the Bayes estimator built from ``prior`` itself."""
    rule = rule or make_quadrature(DEFAULT_QUAD_ORDER)
    thetas = np.concatenate([[0.0], prior.mu])
    masses = np.concatenate([[prior.weight_at_zero], 2.0 * prior.mass])
    if prior.slab is not None:
        nodes, weights = _slab_rule(prior.slab.half_width)
        thetas = np.concatenate([thetas, nodes])
        # density mass/(2l) on [-l, l], folded onto [0, l] by symmetry
        masses = np.concatenate([masses, weights * prior.slab.mass / prior.slab.half_width])
    quad = thetas * thetas / (2.0 * cfg.r)
    rho = quad - e_log_N_curve(prior, cfg, thetas, cfg.v, rule) + e_log_N_curve(
        prior, cfg, thetas, 1.0, rule
    )
    return float(np.dot(masses, rho))


def _log_mixture_sum(prior, s, q):
    """log of 1 + sum over the prior (relative to pi_0) of exp(mu s - q mu^2 / 2)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    parts = [np.zeros_like(s)]
    if prior.mu.size:
        a = prior.log_ratio - 0.5 * q * prior.mu**2
        lin = np.multiply.outer(s, prior.mu)
        parts.extend([(a + lin).T, (a - lin).T])
    if prior.slab is not None:
        l = prior.slab.half_width
        sq = math.sqrt(q)
        lo = sq * (-l - s / q)
        hi = sq * (l - s / q)
        slab = prior.slab_log_coef - 0.5 * math.log(q) + s * s / (2.0 * q) + log_interval_prob_array(lo, hi)
        parts.append(slab[None, :])
    stacked = np.vstack([np.atleast_2d(p) for p in parts])
    m = stacked.max(axis=0)
    return m + np.log(np.exp(stacked - m).sum(axis=0))


def log_predictive_density(prior, cfg, x, y):
    """log p_hat(y | x) = log phi(y | 0, r) + log N(x, y) - log D(x)."""
    r = cfg.r
    y = np.asarray(y, dtype=float)
    log_phi = -0.5 * y * y / r - LOG_SQRT_2PI - 0.5 * math.log(r)
    log_num = _log_mixture_sum(prior, float(x) + y / r, 1.0 + 1.0 / r)
    log_den = _log_mixture_sum(prior, float(x), 1.0)[0]
    out = log_phi + log_num - log_den
    if not np.all(np.isfinite(out)):
        raise RuntimeError(f"non-finite predictive density at x={x}")
    return float(out[0]) if y.ndim == 0 else out


def predictive_density(prior, cfg, x, y):
    """Bayes predictive density p_hat(y | x); vectorised over ``y``."""
    return np.exp(log_predictive_density(prior, cfg, x, y))


def plugin_density(cfg, x, y):
    tau = cfg.lam / math.sqrt(cfg.v)
    centre = float(x) if abs(x) > tau else 0.0
    y = np.asarray(y, dtype=float)
    return np.exp(-0.5 * (y - centre) ** 2 / cfg.r - LOG_SQRT_2PI - 0.5 * math.log(cfg.r))


def mc_oracle_e_log_N(prior, cfg, theta, variance, n_samples=10**7, seed=42, chunk=10**6):
    """Monte-Carlo (mean, standard error) of log N_{theta,variance}(Z)."""
    if n_samples < 10**5:
        raise ValueError("the Monte-Carlo oracle needs at least 1e5 samples")
    variance = _check_variance(cfg, variance)
    mu, logw, slab_logc, slab_l = _kernel_args(prior)

    def f(z):
        return _kernels.log_n_values(float(theta), z, mu, logw, slab_logc, slab_l, variance)

    return mc_expect(f, n_samples=n_samples, seed=seed, chunk=chunk)
