"""Property battery: invariants that must hold at any finite eta.

Each check returns ``(passed, detail)``; ``run_selftest`` times them and
collects the results.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .asymptotics import gap_argmin
from .numerics import LOG_SQRT_2PI, gauss_expect, log_interval_prob_array, make_quadrature
from .oracles import log_mean_N, mc_plugin_risk, mixture_density, random_plugin_points
from .priors import bigrid_spec, grid_spec, make_config, point_prior, spike_slab_prior, theta_to_coords
from .risk import (
    DEFAULT_QUAD_ORDER,
    EstimatorKind,
    e_log_N,
    e_log_N_curve,
    mc_oracle_e_log_N,
    predictive_density,
    prior_for,
    rho_plugin,
    risk,
    risk_components,
)
from .scan import TABLE_ETAS, TABLE_RS

CELLS = [(eta, r) for eta in TABLE_ETAS for r in TABLE_RS]
MC_SAMPLES = 10**7


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _bayes_kinds(cfg):
    return [
        EstimatorKind.grid(),
        EstimatorKind.bigrid(),
        EstimatorKind.spike_slab(5.0 * cfg.lam),
        EstimatorKind.point(),
    ]


def check_mass_normalisation(rng, rule):
    worst = 0.0
    for eta, r in CELLS:
        cfg = make_config(eta, r)
        for kind in _bayes_kinds(cfg):
            worst = max(worst, abs(prior_for(kind, cfg).total_mass() - 1.0))
    return worst <= 1e-10, f"max |mass - 1| = {worst:.2e}"


def check_symmetry(rng, rule):
    worst = 0.0
    for eta, r in [(0.1, 1.0), (0.001, 0.1), (1e-10, 0.25)]:
        cfg = make_config(eta, r)
        thetas = rng.uniform(0.0, 5.0 * cfg.lam, 8)
        both = np.concatenate([thetas, -thetas])
        for kind in _bayes_kinds(cfg) + [EstimatorKind.plugin()]:
            rho = risk_components(kind, cfg, both, rule, 5.0 * cfg.lam)[3]
            worst = max(worst, float(np.max(np.abs(rho[:8] - rho[8:]))))
    return worst <= 1e-10, f"max |rho(t) - rho(-t)| = {worst:.2e}"


def check_sandwich(rng, rule):
    bad = 0
    low = math.inf
    for eta, r in CELLS:
        cfg = make_config(eta, r)
        thetas = np.linspace(0.0, 5.0 * cfg.lam, 128)
        for kind in _bayes_kinds(cfg):
            q, en, ed, rho = risk_components(kind, cfg, thetas, rule)
            ok = (en >= 0) & (ed >= 0) & (rho >= -1e-9)
            ok &= (q - en - 1e-9 <= rho) & (rho <= q + ed + 1e-9)
            bad += int(np.sum(~ok))
            low = min(low, float(rho.min()))
    return bad == 0, f"{bad} violations; min rho = {low:.2e}"


def check_jensen(rng, rule):
    worst = -math.inf
    for eta, r in CELLS:
        cfg = make_config(eta, r)
        for kind in (EstimatorKind.grid(), EstimatorKind.bigrid()):
            prior = prior_for(kind, cfg)
            thetas = np.linspace(0.0, 5.0 * cfg.lam, 32)
            for var in (cfg.v, 1.0):
                e = e_log_N_curve(prior, cfg, thetas, var, rule)
                bound = np.array([log_mean_N(prior, cfg, t, var) for t in thetas])
                worst = max(worst, float(np.max(e - bound)))
    return worst <= 1e-9, f"max(E log N - log E N) = {worst:.2e}"


def check_risk_at_zero(rng, rule):
    worst = -math.inf
    for eta, r in CELLS:
        cfg = make_config(eta, r)
        cap = -math.log1p(-eta)
        for kind in _bayes_kinds(cfg):
            worst = max(worst, risk(kind, cfg, 0.0, rule).rho - cap)
    return worst <= 1e-9, f"max(rho(0) - log 1/(1-eta)) = {worst:.2e}"


def check_slab_log_bound(rng, rule):
    worst = -math.inf
    count = 0
    for eta in (0.5, 0.1, 0.001, 1e-10):
        for r in (1.0, 0.1):
            cfg = make_config(eta, r)
            for l in (1.0, 2.0, 5.0, 5.0 * cfg.lam):
                prior = spike_slab_prior(eta, l)
                thetas = np.linspace(cfg.v / l, 3.0 * l, 24)
                e = e_log_N_curve(prior, cfg, thetas, cfg.v, rule)
                worst = max(worst, float(np.max(e - thetas * l / cfg.v)))
                count += thetas.size
    return worst <= 0.0, f"{count} points; max(E log N - theta l/v) = {worst:.3e}"


def check_phi_lower_bound(rng, rule):
    floor = -LOG_SQRT_2PI - 2.0 / 3.0 - 1e-9
    worst = math.inf
    for v in (0.3, 0.5, 0.9):
        sv = math.sqrt(v)
        for l in (1.0, 2.0, 5.0):
            for theta in np.linspace(0.0, l, 21):
                z = rule.nodes
                val = rule.expect(log_interval_prob_array((-l - theta) / sv - z, (l - theta) / sv - z))
                worst = min(worst, val - floor)
    return worst >= 0.0, f"min(E log Phi_lv - (log phi(0) - 2/3)) = {worst:.3e}"


def check_gap_argmin(rng, rule):
    mismatches = 0
    total = 0
    for b in (1.0, 0.4):
        for eta, r in [(0.1, 1.0), (0.001, 0.1), (1e-10, 0.25)]:
            cfg = make_config(eta, r)
            spec = grid_spec(cfg) if b == 1.0 else bigrid_spec(cfg, b=b)
            for theta in rng.uniform(cfg.lam, 8.0 * cfg.lam, 200):
                total += 1
                if gap_argmin(theta, cfg, spec) != theta_to_coords(theta, cfg, spec)[0]:
                    mismatches += 1
    return mismatches == 0, f"{mismatches}/{total} mismatches"


def check_density_normalisation(rng, rule):
    nodes, weights = np.polynomial.legendre.leggauss(32)
    worst = 0.0
    for eta, r in [(0.1, 1.0), (0.001, 0.25), (1e-10, 0.1)]:
        cfg = make_config(eta, r)
        priors = [prior_for(k, cfg, 10.0 * cfg.lam) for k in _bayes_kinds(cfg)]
        for x in rng.uniform(-6.0 * cfg.lam, 6.0 * cfg.lam, 20):
            L = abs(x) + 10.0 * cfg.lam + 14.0
            edges = np.linspace(-L, L, 129)
            h = 0.5 * np.diff(edges)
            y = (edges[:-1, None] + h[:, None] * (nodes[None, :] + 1.0)).ravel()
            w = (h[:, None] * weights[None, :]).ravel()
            for prior in priors:
                worst = max(worst, abs(float(w @ predictive_density(prior, cfg, x, y)) - 1.0))
    return worst <= 1e-6, f"max |int p_hat - 1| = {worst:.2e}"


def check_density_oracle(rng, rule):
    worst = 0.0
    for eta, r in [(0.1, 1.0), (0.001, 0.25), (1e-10, 0.1)]:
        cfg = make_config(eta, r)
        for kind in (EstimatorKind.grid(), EstimatorKind.bigrid()):
            prior = prior_for(kind, cfg, 10.0 * cfg.lam)
            xs = rng.uniform(-5.0 * cfg.lam, 5.0 * cfg.lam, 100)
            ys = xs + rng.normal(0.0, 2.0, 100)
            for x, y in zip(xs, ys):
                a = predictive_density(prior, cfg, x, y)
                b = mixture_density(prior, cfg, x, y)
                worst = max(worst, abs(a - b) / b)
    return worst <= 1e-9, f"max relative gap to posterior mixture = {worst:.2e}"


def check_quadrature_doubling(rng, rule):
    worst = 0.0
    where = ""
    for c1 in (1.0, 10.0, 60.0):
        val, err = gauss_expect(rule, lambda z: np.logaddexp(0.0, 3.0 + c1 * z))
        rel = err / (1.0 + abs(val))
        if rel > worst:
            worst, where = rel, f"softplus(3 + {c1:g} z)"
    fine = make_quadrature(2 * rule.order)
    for eta, r in CELLS:
        cfg = make_config(eta, r)
        thetas = np.linspace(0.0, 5.0 * cfg.lam, 64)
        for kind in _bayes_kinds(cfg)[:3]:
            prior = prior_for(kind, cfg)
            for var in (cfg.v, 1.0):
                a = e_log_N_curve(prior, cfg, thetas, var, rule)
                b = e_log_N_curve(prior, cfg, thetas, var, fine)
                rel = float(np.max(np.abs(a - b) / (1.0 + np.abs(b))))
                if rel > worst:
                    worst, where = rel, f"E log N {kind} eta={eta:g} r={r:g} var={var:.3g}"
    return worst < 1e-8, f"worst relative doubling gap {worst:.2e} ({where})"


def check_monte_carlo(rng, rule):
    worst = 0.0
    for eta, r, kind_fn, theta in [
        (0.1, 1.0, lambda c: EstimatorKind.grid(), 2.45),
        (0.001, 0.1, lambda c: EstimatorKind.bigrid(), 1.7),
        (0.1, 0.5, lambda c: EstimatorKind.spike_slab(5.0 * c.lam), 2.1),
    ]:
        cfg = make_config(eta, r)
        prior = prior_for(kind_fn(cfg), cfg)
        for var in (cfg.v, 1.0):
            val, _ = e_log_N(prior, cfg, theta, var, rule)
            mean, se = mc_oracle_e_log_N(prior, cfg, theta, var, n_samples=MC_SAMPLES, seed=int(rng.integers(2**31)))
            worst = max(worst, abs(val - mean) / se)
    for cfg, theta in random_plugin_points(rng, 20, TABLE_RS):
        mean, se = mc_plugin_risk(cfg, theta, n_samples=MC_SAMPLES, seed=int(rng.integers(2**31)))
        worst = max(worst, abs(rho_plugin(cfg, theta) - mean) / se)
    return worst <= 3.0, f"max |quadrature - MC| / se = {worst:.2f}"


CHECKS = [
    ("prior mass normalisation", check_mass_normalisation),
    ("risk symmetry", check_symmetry),
    ("sandwich bounds", check_sandwich),
    ("Jensen bound", check_jensen),
    ("risk at zero", check_risk_at_zero),
    ("spike-slab E log N <= theta l / v", check_slab_log_bound),
    ("E log Phi_lv lower bound", check_phi_lower_bound),
    ("gap argmin equals zone index", check_gap_argmin),
    ("density normalisation", check_density_normalisation),
    ("density vs posterior mixture", check_density_oracle),
    ("quadrature order doubling", check_quadrature_doubling),
    ("Monte-Carlo agreement", check_monte_carlo),
]


def run_selftest(seed=42, quad_order=DEFAULT_QUAD_ORDER, names=None):
    rule = make_quadrature(quad_order)
    results = []
    for i, (name, fn) in enumerate(CHECKS):
        if names is not None and name not in names:
            continue
        rng = np.random.default_rng([seed, i])
        t0 = time.perf_counter()
        try:
            passed, detail = fn(rng, rule)
        except Exception as exc:
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return results
