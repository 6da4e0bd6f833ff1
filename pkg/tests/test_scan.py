import math

import numpy as np
import pytest

from sparse_pde.priors import make_config
from sparse_pde.risk import EstimatorKind
from sparse_pde import scan
from sparse_pde.scan import TableRow, risk_curve, table1, table_row


def test_point_curve_max_at_boundary():
    cfg = make_config(0.1, 0.5)
    c = risk_curve(EstimatorKind.point(), cfg, theta_max=3.0, n_points=64)
    assert c.argmax_theta == 3.0
    assert c.max_rho == pytest.approx(9.0 / (2 * 0.5), rel=1e-12)


@pytest.mark.parametrize("name", ["grid", "bigrid", "ss", "plugin"])
def test_curve_invariants(name):
    cfg = make_config(0.001, 0.25)
    kind = EstimatorKind.spike_slab(5 * cfg.lam) if name == "ss" else EstimatorKind(name)
    c = risk_curve(kind, cfg, n_points=128)
    assert c.thetas[0] == 0.0 and c.thetas[-1] == pytest.approx(5 * cfg.lam)
    assert np.all(np.diff(c.thetas) > 0)
    assert c.max_rho >= c.rhos.max() == c.coarse_max_rho
    assert 0 <= c.argmax_theta <= c.theta_max
    assert c.ratio > 0 and c.ratio == c.max_rho / c.benchmark


def test_refinement_locates_maximum():
    cfg = make_config(0.1, 1.0)
    coarse = risk_curve(EstimatorKind.grid(), cfg, n_points=64)
    fine = risk_curve(EstimatorKind.grid(), cfg, n_points=8192, refine=False)
    assert coarse.max_rho >= coarse.coarse_max_rho
    assert coarse.max_rho >= fine.max_rho - 1e-12
    assert abs(coarse.argmax_theta - fine.argmax_theta) < 2e-3


def test_curve_domain():
    cfg = make_config(0.1, 1.0)
    with pytest.raises(ValueError):
        risk_curve(EstimatorKind.grid(), cfg, n_points=10)
    with pytest.raises(ValueError):
        risk_curve(EstimatorKind.grid(), cfg, theta_max=0.0)


def test_ties_go_to_smaller_theta(monkeypatch):
    # a curve with two identical peaks; the coarse pick and the refinement keep the left one
    def twin_peaks(kind, cfg, thetas, rule=None, theta_max=None, prior=None):
        t = np.asarray(thetas, dtype=float)
        rho = np.maximum(1 - (t - 1) ** 2, 1 - (t - 3) ** 2)
        return t, t, t, rho

    monkeypatch.setattr(scan, "risk_components", twin_peaks)
    c = risk_curve(EstimatorKind.plugin(), make_config(0.1, 1.0), theta_max=4.0, n_points=65)
    assert c.argmax_theta == pytest.approx(1.0, abs=1e-6)
    assert c.max_rho == 1.0


def test_table_row_consistency():
    row = table_row(0.1, 1.0, n_points=256)
    assert row.benchmark == pytest.approx(math.log(10) / 2)
    for name in TableRow.COLUMNS:
        cell = getattr(row, name)
        assert abs(cell.ratio - cell.max_rho / row.benchmark) < 1e-12
    # r >= r0: the two priors coincide
    assert row.grid == row.bigrid


def test_table_grid_dominates_bigrid_below_r0():
    rows = table1([0.001], [0.25, 0.1], n_points=256)
    for row in rows:
        assert row.grid.ratio >= row.bigrid.ratio - 1e-9


def test_table_ordering_and_domain():
    rows = table1([0.1, 0.001], [1.0, 0.5], n_points=64)
    assert [(r.eta, r.r) for r in rows] == [(0.1, 1.0), (0.1, 0.5), (0.001, 1.0), (0.001, 0.5)]
    with pytest.raises(ValueError):
        table1([], [1.0])


@pytest.mark.slow
@pytest.mark.parametrize("eta", [0.1, 0.001, 1e-10])
@pytest.mark.parametrize("r", [1.0, 0.5, 0.25, 0.1])
def test_resolution_doubling(eta, r):
    cfg = make_config(eta, r)
    for kind in (EstimatorKind.bigrid(), EstimatorKind.spike_slab(5 * cfg.lam), EstimatorKind.plugin()):
        a = risk_curve(kind, cfg, n_points=2048).max_rho
        b = risk_curve(kind, cfg, n_points=4096).max_rho
        assert abs(a - b) < 1e-4 * abs(b)


def test_grid_periodicity():
    # eta = exp(-lam^2/(2v)) with lam = 5 and r = 1
    lam, r = 5.0, 1.0
    v = r / (1 + r)
    cfg = make_config(math.exp(-lam**2 / (2 * v)), r)
    assert cfg.lam == pytest.approx(lam)
    c = risk_curve(EstimatorKind.grid(), cfg, theta_max=5 * lam, n_points=1001, refine=False)
    idx = (c.thetas >= 2 * lam) & (c.thetas <= 4 * lam)
    shifted = np.interp(c.thetas[idx] + lam, c.thetas, c.rhos)
    assert np.max(np.abs(c.rhos[idx] - shifted)) < 0.05 * c.benchmark
