import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sparse_pde.asymptotics import (
    benchmark_univariate,
    gap_G,
    gap_argmin,
    h_r,
    multivariate_bounds,
    sigma_arrays,
    sigma_max,
    sigma_point,
    sigma_surface,
)
from sparse_pde.priors import R0, bigrid_spec, grid_spec, make_config, theta_to_coords
from sparse_pde.risk import EstimatorKind
from sparse_pde.scan import risk_curve


def test_benchmark():
    assert round(benchmark_univariate(make_config(0.1, 1)), 4) == 1.1513
    assert round(benchmark_univariate(make_config(0.001, 0.5)), 4) == 4.6052
    assert benchmark_univariate(make_config(math.exp(-1), 1)) == pytest.approx(0.5, rel=1e-15)


@given(st.floats(1e-12, 0.9), st.floats(1e-3, 1e3))
def test_benchmark_identity(eta, r):
    cfg = make_config(eta, r)
    assert benchmark_univariate(cfg) == pytest.approx(-math.log(eta) / (1 + r), rel=1e-12)


def test_h_r():
    assert abs(4 * R0**2 + 2 * R0 - 1) < 1e-15
    assert abs(h_r(R0)[0]) < 1e-15 and h_r(R0)[1] == 0.0
    assert h_r(1.0) == (-15 / 16, 0.0)
    assert 1 + h_r(0.1)[0] == pytest.approx(1.188, abs=5e-4)
    assert h_r(0.25)[0] == pytest.approx(0.06, rel=1e-14)
    with pytest.raises(ValueError):
        h_r(0)


@given(st.floats(1e-4, 1e3))
def test_h_plus_sign(r):
    h, hp = h_r(r)
    assert hp == max(h, 0.0)
    if abs(r - R0) > 1e-9:
        assert (hp > 0) == (r < R0)


@pytest.mark.parametrize("r", [1.0, 0.5, 0.309, 0.25, 0.1])
def test_grid_sigma_max(r):
    cfg = make_config(0.01, r)
    spec = grid_spec(cfg)
    best = sigma_max(cfg, spec)
    assert best.sigma == pytest.approx(1 + h_r(r)[1], abs=1e-6)
    # the lattice never beats the analytic maximiser
    assert sigma_arrays(cfg, spec)["sigma"].max() <= best.sigma + 1e-12


def test_grid_sigma_max_location():
    cfg = make_config(0.01, 0.1)
    best = sigma_max(cfg, grid_spec(cfg))
    assert best.l == 1 and best.omega == pytest.approx((1 + cfg.v) / 2)
    assert best.sigma == pytest.approx(1.188, abs=5e-4)


@pytest.mark.parametrize("r", [0.3, 0.25, 0.2, 0.1, 0.05, 0.01])
def test_bigrid_sigma_at_most_one(r):
    cfg = make_config(1e-6, r)
    spec = bigrid_spec(cfg)
    assert sigma_max(cfg, spec).sigma <= 1 + 1e-9
    lat = sigma_arrays(cfg, spec)
    # d >= 0 from the outer zone on when b <= min(1, 4r)
    if spec.b <= min(1.0, 4 * r):
        assert np.all(lat["d"][lat["l"] >= spec.K] >= 0)


@pytest.mark.parametrize("r", [1.0, 0.1])
def test_sigma_point_invariants(r):
    cfg = make_config(0.01, r)
    spec = bigrid_spec(cfg)
    for p in sigma_surface(cfg, spec, l_max=spec.K + 3, omega_steps=16):
        a = spec.alpha(p.l)
        assert p.sigma == pytest.approx((a + p.omega) ** 2 - r * max(p.n_val, p.n_check_val) + r * max(p.d_val, 0))
        diff = p.n_val - p.d_val
        assert diff == pytest.approx((1 / cfg.v - 1) * (a * a + 2 * a * p.omega), rel=1e-12, abs=1e-12)
        assert diff >= -1e-12
        assert p.theta == pytest.approx(cfg.lam * (a + p.omega))


@pytest.mark.parametrize("r", [1.0, 0.25, 0.1])
@pytest.mark.parametrize("l", [1, 2, 5])
def test_sigma_piecewise_quadratic(r, l):
    cfg = make_config(0.01, r)
    spec = bigrid_spec(cfg)
    w = np.linspace(0, spec.alpha_dot(l), 4001)[:-1]
    pts = [sigma_point(cfg, spec, l, x) for x in w]
    s = np.array([p.sigma for p in pts])
    branch = np.array([(p.n_val >= p.n_check_val, p.d_val > 0) for p in pts])
    change = np.any(branch[1:] != branch[:-1], axis=1)
    assert change.sum() <= 2
    d2 = np.diff(s, 2)
    # windows of three points that stay on one branch share one second difference
    same = ~(change[:-1] | change[1:])
    vals = d2[same]
    segments = np.split(vals, np.nonzero(np.diff(np.nonzero(same)[0]) > 1)[0] + 1)
    for seg in segments:
        if seg.size:
            assert np.ptp(seg) < 1e-9


def test_sigma_domain_errors():
    cfg = make_config(0.01, 1)
    spec = grid_spec(cfg)
    with pytest.raises(ValueError):
        sigma_point(cfg, spec, 0, 0.0)
    with pytest.raises(ValueError):
        sigma_point(cfg, spec, 1, 1.5)
    with pytest.raises(ValueError):
        sigma_arrays(cfg, spec, l_max=0)
    with pytest.raises(ValueError):
        sigma_arrays(cfg, spec, omega_steps=1)


@pytest.mark.parametrize("b", [1.0, 0.4])
def test_gap_argmin_examples(b):
    cfg = make_config(0.001, 0.2)
    spec = grid_spec(cfg) if b == 1.0 else bigrid_spec(cfg, b=b)
    for l in range(1, 15):
        mu_l = cfg.lam * spec.alpha(l)
        mu_next = cfg.lam * spec.alpha(l + 1)
        assert gap_argmin(mu_l, cfg, spec) == l
        assert gap_argmin(0.5 * (mu_l + mu_next), cfg, spec) == l


def test_gap_tie_at_support_point():
    cfg = make_config(0.01, 1)
    spec = grid_spec(cfg)
    theta = cfg.lam * spec.alpha(3)
    assert gap_G(2, theta, cfg, spec) == pytest.approx(gap_G(3, theta, cfg, spec), rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(1.0, 8.0), st.sampled_from([1.0, 0.4]), st.sampled_from([(0.1, 1.0), (0.001, 0.1), (1e-10, 0.3)]))
def test_gap_argmin_brute_force(t, b, eta_r):
    cfg = make_config(*eta_r)
    spec = grid_spec(cfg) if b == 1.0 else bigrid_spec(cfg, b=b)
    theta = t * cfg.lam
    l = theta_to_coords(theta, cfg, spec)[0]
    # away from support points the minimum is strict; ties there have their own test
    alphas = spec.alpha(np.arange(1, l + 32))
    assume(np.min(np.abs(alphas - t)) > 1e-9)
    j = np.arange(1, l + 31)
    # G / lam^2 in lam units, an independent rearrangement of the same quadratic
    vals = 0.5 * spec.alpha(j) ** 2 - spec.alpha(j) * t + 0.5 * (spec.beta(j) + 1 / cfg.r)
    assert gap_argmin(theta, cfg, spec) == j[np.argmin(vals)] == l


@pytest.mark.parametrize("b", [1.0, 0.4])
def test_gap_argmin_within_rounding_of_support_point(b):
    cfg = make_config(0.1, 1.0)
    spec = grid_spec(cfg) if b == 1.0 else bigrid_spec(cfg, b=b)
    for l in (2, 3, 7):
        mu = cfg.lam * spec.alpha(l)
        for theta in (np.nextafter(mu, 0), mu, np.nextafter(mu, np.inf)):
            assert theta_to_coords(theta, cfg, spec) == (l, 0.0)
            assert gap_argmin(theta, cfg, spec) == l


def test_gap_domain():
    cfg = make_config(0.01, 1)
    spec = grid_spec(cfg)
    with pytest.raises(ValueError):
        gap_G(0, 2 * cfg.lam, cfg, spec)
    with pytest.raises(ValueError):
        gap_G(1, 0.5 * cfg.lam, cfg, spec)


def test_multivariate_bounds():
    lo, up = multivariate_bounds(5, 5, 0.0, 2.0, 2.0)
    assert lo == up == 10.0
    lo, up = multivariate_bounds(5, 5, 0.0, 2.0, 1.5)
    assert lo < up
    lo, up = multivariate_bounds(10, 1000, 0.01, 3.0, 2.0)
    assert lo == 20.0 and up == pytest.approx(990 * 0.01 + 30.0)
    for bad in [(0, 10, 0, 1, 1), (11, 10, 0, 1, 1), (1, 10, -1, 1, 1), (1, 10, 0, math.nan, 1)]:
        with pytest.raises(ValueError):
            multivariate_bounds(*bad)


def test_multivariate_composes_with_scan():
    eta, n = 0.01, 1000
    s = int(eta * n)
    cfg = make_config(eta, 1.0)
    curve = risk_curve(EstimatorKind.grid(), cfg, n_points=256)
    rho0 = float(curve.rhos[0])
    assert rho0 <= -math.log1p(-eta)
    lo, up = multivariate_bounds(s, n, rho0, curve.max_rho, curve.max_rho)
    bench = benchmark_univariate(cfg)
    assert up / (s * bench) == pytest.approx(curve.ratio + n * (1 - s / n) * rho0 / (s * bench), rel=1e-12)
    # n rho(0) <= n log(1/(1-eta)) ~ s(1 + eta)
    assert n * rho0 <= s * (1 + eta)


@pytest.mark.parametrize("r", [0.1, 0.25])
def test_sigma_predicts_grid_scan(r):
    cfg = make_config(1e-10, r)
    curve = risk_curve(EstimatorKind.grid(), cfg)
    assert abs(curve.ratio - (1 + h_r(r)[1])) <= 0.05
