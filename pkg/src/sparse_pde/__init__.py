"""Sparse Bayes predictive densities in the Gaussian sequence model.

Priors (grid, bi-grid, spike-and-slab), exact Kullback-Leibler risk curves,
maximum-risk tables and the asymptotic diagnostics behind them.
"""

from .numerics import make_quadrature, gauss_expect
from .priors import (
    ModelConfig,
    SparsePrior,
    BiGridSpec,
    make_config,
    b_of_r,
    K_of_b,
    grid_prior,
    bigrid_prior,
    spike_slab_prior,
    point_prior,
)
from .risk import EstimatorKind, RiskBreakdown, risk, rho_plugin, bayes_risk, predictive_density
from .scan import RiskCurve, risk_curve, table1
from .asymptotics import benchmark_univariate, h_r, sigma_max

__version__ = "0.1.0"
