"""Reference computations that share no code path with the risk kernels.

They are slow and only meant for verification: the Bayes predictive density
as an explicit posterior mixture, the KL risk as a double integral over
(X, Y), the slab term of N by adaptive quadrature, and Monte-Carlo loss of the
hard-threshold plug-in.
"""

import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.special import logsumexp
from scipy.stats import norm

from .priors import make_config


def _mirrored(prior):
    if prior.slab is not None:
        raise ValueError("the posterior-mixture oracles need an atom-only prior")
    locs = np.concatenate([[0.0], prior.mu, -prior.mu])
    log_w = np.concatenate([[math.log(prior.weight_at_zero)], prior.log_mass, prior.log_mass])
    return locs, log_w


def posterior_weights(prior, x):
    """Posterior probabilities of every (mirrored) atom given X = x."""
    locs, log_w = _mirrored(prior)
    a = log_w - 0.5 * (float(x) - locs) ** 2
    return locs, np.exp(a - logsumexp(a))


def mixture_log_density(prior, cfg, x, y):
    """log sum_j w_j(x) phi(y | mu_j, r)."""
    locs, log_w = _mirrored(prior)
    a = log_w - 0.5 * (float(x) - locs) ** 2
    log_post = a - logsumexp(a)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    comp = -0.5 * (y[:, None] - locs[None, :]) ** 2 / cfg.r - 0.5 * math.log(2.0 * math.pi * cfg.r)
    return logsumexp(log_post[None, :] + comp, axis=1)


def mixture_density(prior, cfg, x, y):
    out = np.exp(mixture_log_density(prior, cfg, x, y))
    return float(out[0]) if np.ndim(y) == 0 else out


def _normal_rule(panels, half_width=12.0, nodes=32):
    x, w = leggauss(nodes)
    edges = np.linspace(-half_width, half_width, panels + 1)
    h = 0.5 * np.diff(edges)
    z = (edges[:-1, None] + h[:, None] * (x[None, :] + 1.0)).ravel()
    wz = (h[:, None] * w[None, :]).ravel() * norm.pdf(z)
    return z, wz


def brute_force_risk(prior, cfg, theta, panels=64):
    """KL risk E_X KL(N(theta, r) || p_hat(.|X)) by tensor Gauss-Legendre in (X, Y)."""
    zx, wx = _normal_rule(panels)
    zy, wy = _normal_rule(panels)
    sr = math.sqrt(cfg.r)
    y = float(theta) + sr * zy
    log_p = norm.logpdf(y, loc=float(theta), scale=sr)
    total = 0.0
    for x0, w0 in zip(zx, wx):
        total += w0 * float(wy @ (log_p - mixture_log_density(prior, cfg, theta + x0, y)))
    return total


def slab_log_N(eta, l, theta, variance, z):
    """log N for the spike-and-slab prior by integrating the slab directly."""
    sv = math.sqrt(variance)

    def integrand(m):
        return math.exp(m * z / sv + m * theta / variance - m * m / (2.0 * variance))

    val, _ = integrate.quad(integrand, -l, l, epsabs=0.0, epsrel=1e-13, limit=200)
    return math.log1p(eta / (1.0 - eta) / (2.0 * l) * val)


def log_mean_N(prior, cfg, theta, variance=None):
    """log E N_{theta,var}(Z) = log(1 + sum_j (pi_j/pi_0) 2 cosh(mu_j theta/var)) for atom-only priors."""
    if prior.slab is not None:
        raise ValueError("closed-form E N is implemented for atom-only priors")
    var = cfg.v if variance is None else float(variance)
    s = prior.mu * abs(float(theta)) / var
    # 2 cosh(s) = e^s (1 + e^{-2s})
    terms = prior.log_ratio + s + np.log1p(np.exp(-2.0 * s))
    return float(np.logaddexp(0.0, logsumexp(terms))) if terms.size else 0.0


def mc_plugin_risk(cfg, theta, n_samples=10**7, seed=42, chunk=10**6):
    """Monte-Carlo (mean, standard error) of (theta - theta_hat_H(X))^2 / (2r)."""
    tau = cfg.lam / math.sqrt(cfg.v)

    def loss(z):
        x = theta + z
        est = np.where(np.abs(x) > tau, x, 0.0)
        return (theta - est) ** 2 / (2.0 * cfg.r)

    return mc_expect(loss, n_samples=n_samples, seed=seed, chunk=chunk)


def plugin_exceed_prob(cfg, theta):
    """P(|theta + Z| > lam/sqrt(v)): how often the plug-in leaves zero."""
    tau = cfg.lam / math.sqrt(cfg.v)
    return float(norm.sf(tau - theta) + norm.cdf(-tau - theta))


def random_plugin_points(rng, count, rs, min_exceed=1e-4):
    """Random (cfg, theta) with eta in [1e-10, 0.1], theta in [0, 5 lam].

    Points where the threshold is crossed with probability below
    ``min_exceed`` are redrawn: a sample that never crosses it sees a
    constant loss and reports a meaningless standard error.
    """
    out = []
    while len(out) < count:
        cfg = make_config(10.0 ** rng.uniform(-10, -1), float(rng.choice(rs)))
        theta = rng.uniform(0.0, 5.0 * cfg.lam)
        if plugin_exceed_prob(cfg, theta) >= min_exceed:
            out.append((cfg, theta))
    return out


def mc_expect(f, n_samples=10**7, seed=42, chunk=10**6):
    """Monte-Carlo (mean, standard error) of E f(Z) for vectorised f."""
    rng = np.random.default_rng(seed)
    total = total_sq = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        vals = np.asarray(f(rng.standard_normal(m)), dtype=float)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += m
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    return mean, math.sqrt(var / (n_samples - 1))
