"""Hot loops of the risk engine: log N_{theta,var}(z) and its Gaussian expectation.

Both backends take the same arguments:

    thetas      parameter values
    z, w        quadrature nodes and weights (or raw samples for ``log_n_values``)
    mu, logw    positive atom locations and log(pi_j / pi_0); atoms are mirrored
    slab_logc   log of slab_mass / (pi_0 2l phi(0)), -inf without a slab
    slab_l      slab half-width, 0 without a slab
    var         v (predictive part) or 1 (the D term)

``USE_NUMBA`` picks the compiled loops; otherwise the numpy versions run.
"""

import math

import numpy as np

from ._jit import USE_NUMBA, njit, prange
from .numerics import _log_interval_prob, log_interval_prob_array

# Terms this far below the running maximum cannot move a double-precision sum.
_NEGLIGIBLE = 40.0


@njit
def _log_n_point(theta, z, a, mu, slab_logc, slab_l, var, sv):
    u = z / sv + theta / var
    m = 0.0
    for j in range(mu.shape[0]):
        t = a[j] + abs(mu[j] * u)
        if t > m:
            m = t
    ts = -math.inf
    if slab_l > 0.0:
        lo = (-slab_l - theta) / sv - z
        hi = (slab_l - theta) / sv - z
        su = sv * u
        ts = slab_logc + 0.5 * math.log(var) + 0.5 * su * su + _log_interval_prob(lo, hi)
        if ts > m:
            m = ts
    rest = 0.0
    floor = m - _NEGLIGIBLE
    for j in range(mu.shape[0]):
        s = abs(mu[j] * u)
        hi = a[j] + s
        if hi < floor:
            continue
        rest += math.exp(hi - m)
        lo = a[j] - s
        if lo >= floor:
            rest += math.exp(lo - m)
    if slab_l > 0.0:
        rest += math.exp(ts - m)
    if m == 0.0:
        return math.log1p(rest)
    return m + math.log(math.exp(-m) + rest)


@njit(parallel=True)
def _e_log_n_numba(thetas, z, w, mu, logw, slab_logc, slab_l, var):
    sv = math.sqrt(var)
    a = logw - mu * mu / (2.0 * var)
    out = np.empty(thetas.shape[0])
    for i in prange(thetas.shape[0]):
        acc = 0.0
        for k in range(z.shape[0]):
            acc += w[k] * _log_n_point(thetas[i], z[k], a, mu, slab_logc, slab_l, var, sv)
        out[i] = acc
    return out


@njit(parallel=True)
def _log_n_values_numba(theta, z, mu, logw, slab_logc, slab_l, var):
    sv = math.sqrt(var)
    a = logw - mu * mu / (2.0 * var)
    out = np.empty(z.shape[0])
    for k in prange(z.shape[0]):
        out[k] = _log_n_point(theta, z[k], a, mu, slab_logc, slab_l, var, sv)
    return out


def _log_n_values_numpy(theta, z, mu, logw, slab_logc, slab_l, var):
    z = np.asarray(z, dtype=float)
    sv = math.sqrt(var)
    a = logw - mu * mu / (2.0 * var)
    u = z / sv + theta / var
    s = np.multiply.outer(u, mu)
    terms = [a + s, a - s]
    m = np.maximum(0.0, (a + np.abs(s)).max(axis=1, initial=0.0))
    if slab_l > 0.0:
        lo = (-slab_l - theta) / sv - z
        hi = (slab_l - theta) / sv - z
        ts = slab_logc + 0.5 * math.log(var) + 0.5 * (sv * u) ** 2 + log_interval_prob_array(lo, hi)
        m = np.maximum(m, ts)
        rest = np.exp(ts - m)
    else:
        rest = np.zeros_like(z)
    for t in terms:
        rest = rest + np.exp(t - m[:, None]).sum(axis=1)
    with np.errstate(over="ignore"):
        general = m + np.log(np.exp(-m) + rest)
    return np.where(m == 0.0, np.log1p(rest), general)


def _e_log_n_numpy(thetas, z, w, mu, logw, slab_logc, slab_l, var):
    return np.array(
        [w @ _log_n_values_numpy(t, z, mu, logw, slab_logc, slab_l, var) for t in thetas]
    )


if USE_NUMBA:
    e_log_n = _e_log_n_numba
    log_n_values = _log_n_values_numba
else:
    e_log_n = _e_log_n_numpy
    log_n_values = _log_n_values_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
