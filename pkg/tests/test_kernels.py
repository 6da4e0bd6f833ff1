import os
import subprocess
import sys

import numpy as np
import pytest

from sparse_pde import _kernels
from sparse_pde._jit import USE_NUMBA
from sparse_pde.numerics import make_quadrature
from sparse_pde.priors import make_config, point_prior
from sparse_pde.risk import EstimatorKind, _kernel_args, prior_for

CASES = [("grid", 0.1, 1.0), ("bigrid", 0.1, 0.1), ("bigrid", 1e-10, 0.25), ("ss", 0.001, 0.5)]


def args_for(name, eta, r):
    cfg = make_config(eta, r)
    kind = EstimatorKind.spike_slab(5 * cfg.lam) if name == "ss" else EstimatorKind(name)
    return cfg, _kernel_args(prior_for(kind, cfg))


@pytest.mark.skipif(not USE_NUMBA, reason="compiled backend disabled")
@pytest.mark.parametrize("name,eta,r", CASES)
def test_backends_agree(name, eta, r):
    cfg, (mu, logw, slab_logc, slab_l) = args_for(name, eta, r)
    rule = make_quadrature(256)
    thetas = np.linspace(-6 * cfg.lam, 6 * cfg.lam, 25)
    for var in (cfg.v, 1.0):
        a = _kernels._e_log_n_numba(thetas, rule.nodes, rule.weights, mu, logw, slab_logc, slab_l, var)
        b = _kernels._e_log_n_numpy(thetas, rule.nodes, rule.weights, mu, logw, slab_logc, slab_l, var)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
        z = np.linspace(-14, 14, 201)
        a = _kernels._log_n_values_numba(thetas[3], z, mu, logw, slab_logc, slab_l, var)
        b = _kernels._log_n_values_numpy(thetas[3], z, mu, logw, slab_logc, slab_l, var)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-13)


def test_point_prior_kernel_is_zero():
    mu, logw, slab_logc, slab_l = _kernel_args(point_prior())
    z = np.linspace(-3, 3, 7)
    np.testing.assert_array_equal(_kernels.log_n_values(1.0, z, mu, logw, slab_logc, slab_l, 1.0), 0.0)
    np.testing.assert_array_equal(_kernels._log_n_values_numpy(1.0, z, mu, logw, slab_logc, slab_l, 1.0), 0.0)


def test_backend_label():
    assert _kernels.BACKEND == ("numba" if USE_NUMBA else "numpy")


def test_disable_flag_switches_backend():
    env = dict(os.environ, SPARSE_PDE_DISABLE_JIT="1")
    code = ("from sparse_pde import _kernels; from sparse_pde.risk import risk, EstimatorKind;"
            "from sparse_pde.priors import make_config;"
            "print(_kernels.BACKEND, repr(risk(EstimatorKind.grid(), make_config(0.1, 1.0), 2.45).rho))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, rho = out.stdout.split()
    assert backend == "numpy"
    assert float(rho) == pytest.approx(0.9625372372634542, rel=1e-12)
