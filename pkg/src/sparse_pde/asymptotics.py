"""First-order asymptotics: the minimax benchmark, the h_r phase transition,
the dominant-risk surface sigma(l, omega), the gap function G and the
multivariate risk reduction.

Everything here is closed form; nothing integrates.
"""

import math
from dataclasses import dataclass

import numpy as np

from .priors import theta_to_coords

DEFAULT_OMEGA_STEPS = 512
# Extra lam-multiples beyond the 5*lam scan range covered by the sigma lattice.
SIGMA_REACH_LAMBDAS = 7.0
GAP_LOOKAHEAD = 30
_TIE_RTOL = 1e-12


def benchmark_univariate(cfg):
    """Per-nonzero-coordinate minimax benchmark lam^2/(2r) = log(1/eta)/(1+r)."""
    return cfg.lam**2 / (2.0 * cfg.r)


def h_r(r):
    """(h, max(h, 0)) with h = (1+2r)(1+r)^-2 (1-2r-4r^2)/4."""
    r = float(r)
    if not r > 0.0:
        raise ValueError(f"r must be positive, got {r}")
    h = (1.0 + 2.0 * r) * (1.0 - 2.0 * r - 4.0 * r * r) / (4.0 * (1.0 + r) ** 2)
    return h, max(h, 0.0)


@dataclass(frozen=True)
class SigmaPoint:
    l: int
    omega: float
    theta: float
    n_val: float
    n_check_val: float
    d_val: float
    sigma: float


def _sigma_parts(cfg, spec, l, omega):
    # vectorised over omega; l is a scalar zone index
    v, r = cfg.v, cfg.r
    a = spec.alpha(l)
    a_dot = spec.alpha_dot(l)
    q = a * a + 2.0 * a * omega
    n = q / v - spec.beta(l) - 1.0 / r
    d = q - spec.beta(l) - 1.0 / r
    n_check = n + 2.0 * a_dot * omega / v - (1.0 + 1.0 / v) * a_dot * a_dot
    sigma = (a + omega) ** 2 - r * np.maximum(n, n_check) + r * np.maximum(d, 0.0)
    return n, n_check, d, sigma


def sigma_point(cfg, spec, l, omega):
    """Dominant risk at theta = lam (alpha_l + omega)."""
    l = int(l)
    if l < 1:
        raise ValueError(f"zone index must be >= 1, got {l}")
    omega = float(omega)
    if not 0.0 <= omega < spec.alpha_dot(l) + 1e-12:
        raise ValueError(f"omega must lie in [0, {spec.alpha_dot(l)}), got {omega}")
    n, nc, d, s = _sigma_parts(cfg, spec, l, omega)
    theta = cfg.lam * (spec.alpha(l) + omega)
    return SigmaPoint(l, omega, theta, float(n), float(nc), float(d), float(s))


def default_l_max(cfg, spec):
    """Zone containing SIGMA_REACH_LAMBDAS * lam."""
    return theta_to_coords(SIGMA_REACH_LAMBDAS * cfg.lam, cfg, spec)[0]


def sigma_arrays(cfg, spec, l_max=None, omega_steps=DEFAULT_OMEGA_STEPS):
    """Lattice columns (l, omega, theta, n, n_check, d, sigma) as arrays."""
    if l_max is None:
        l_max = default_l_max(cfg, spec)
    l_max = int(l_max)
    omega_steps = int(omega_steps)
    if l_max < 1:
        raise ValueError(f"l_max must be >= 1, got {l_max}")
    if omega_steps < 2:
        raise ValueError(f"omega_steps must be >= 2, got {omega_steps}")
    frac = np.arange(omega_steps) / omega_steps
    cols = {k: [] for k in ("l", "omega", "theta", "n", "n_check", "d", "sigma")}
    for l in range(1, l_max + 1):
        omega = spec.alpha_dot(l) * frac
        n, nc, d, s = _sigma_parts(cfg, spec, l, omega)
        cols["l"].append(np.full(omega_steps, l))
        cols["omega"].append(omega)
        cols["theta"].append(cfg.lam * (spec.alpha(l) + omega))
        cols["n"].append(n)
        cols["n_check"].append(nc)
        cols["d"].append(d)
        cols["sigma"].append(s)
    return {k: np.concatenate(v) for k, v in cols.items()}


def sigma_surface(cfg, spec, l_max=None, omega_steps=DEFAULT_OMEGA_STEPS):
    """sigma(l, omega) on the lattice l = 1..l_max, omega = alpha_dot_l * k / omega_steps."""
    a = sigma_arrays(cfg, spec, l_max, omega_steps)
    return [
        SigmaPoint(int(l), float(w), float(t), float(n), float(nc), float(d), float(s))
        for l, w, t, n, nc, d, s in zip(
            a["l"], a["omega"], a["theta"], a["n"], a["n_check"], a["d"], a["sigma"]
        )
    ]


def grid_sigma_candidates(cfg, spec):
    """sigma at (1, 0) and at the interior stationary point omega* = (1+v)/2."""
    if spec.b != 1.0:
        raise ValueError("the analytic maximiser only applies to the grid prior (b = 1)")
    return [sigma_point(cfg, spec, 1, 0.0), sigma_point(cfg, spec, 1, 0.5 * (1.0 + cfg.v))]


def sigma_max(cfg, spec, l_max=None, omega_steps=DEFAULT_OMEGA_STEPS):
    """Largest sigma; located analytically for the grid prior, by lattice otherwise.

    Ties go to the smaller theta.
    """
    if spec.b == 1.0:
        cands = grid_sigma_candidates(cfg, spec)
        best = cands[0]
        for c in cands[1:]:
            if c.sigma > best.sigma:
                best = c
        return best
    a = sigma_arrays(cfg, spec, l_max, omega_steps)
    i = int(np.argmax(a["sigma"]))
    return sigma_point(cfg, spec, int(a["l"][i]), float(a["omega"][i]))


def gap_G(j, theta, cfg, spec):
    """G(mu_j; theta) = mu_j^2/2 - mu_j theta + lam^2 (beta_j + 1/r)/2."""
    j_arr = np.asarray(j)
    if np.any(j_arr < 1):
        raise ValueError("atom index must be >= 1")
    theta = float(theta)
    if theta < cfg.lam * (1.0 - 1e-12):
        raise ValueError(f"theta must be >= lam = {cfg.lam}, got {theta}")
    mu = cfg.lam * spec.alpha(j_arr)
    out = 0.5 * mu * mu - mu * theta + 0.5 * cfg.lam**2 * (spec.beta(j_arr) + 1.0 / cfg.r)
    return float(out) if np.ndim(out) == 0 else out


def gap_argmin(theta, cfg, spec, lookahead=GAP_LOOKAHEAD):
    """argmin_j G(mu_j; theta) over j = 1..l(theta)+lookahead.

    At a support point theta = mu_l the values at l-1 and l coincide exactly;
    that tie goes to the larger index. ``theta`` counts as a support point
    when ``theta_to_coords`` puts it there.
    """
    l, omega = theta_to_coords(theta, cfg, spec)
    j = np.arange(1, l + lookahead + 1)
    if omega == 0.0:
        g = gap_G(j, cfg.lam * spec.alpha(l), cfg, spec)
        tol = _TIE_RTOL * cfg.lam**2 * max(1.0, spec.alpha(l) ** 2)
    else:
        g = gap_G(j, theta, cfg, spec)
        tol = 0.0
    return int(j[np.nonzero(g <= g.min() + tol)[0][-1]])


def multivariate_bounds(s, n, rho_at_zero, sup_rho, sup_rho_bounded):
    """(s * sup over the bounded set, (n - s) rho(0) + s * sup rho)."""
    s = int(s)
    n = int(n)
    if not 0 < s <= n:
        raise ValueError(f"need 0 < s <= n, got s={s}, n={n}")
    for name, val in (("rho_at_zero", rho_at_zero), ("sup_rho", sup_rho), ("sup_rho_bounded", sup_rho_bounded)):
        if not (val >= 0.0 and math.isfinite(val)):
            raise ValueError(f"{name} must be finite and nonnegative, got {val}")
    lower = s * sup_rho_bounded
    upper = n * (1.0 - s / n) * rho_at_zero + s * sup_rho
    return lower, upper
