"""Sparse symmetric priors: grid, bi-grid, spike-and-slab and the point mass.

All discrete priors belong to one family indexed by an inner spacing factor
``b``: support points ``lam * alpha_j`` with masses ``c * eta * zeta**(beta_j - 1)``
per side. ``b = 1`` gives the grid prior, ``b < 1`` the bi-grid prior.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Extra reach of the atom list beyond the largest theta that will be evaluated.
ATOM_MARGIN = 15.0
DEFAULT_MASS_TOL = 1e-16
R0 = (math.sqrt(5.0) - 1.0) / 4.0
_B_ONE_TOL = 1e-14
_COORD_SNAP = 1e-13


@dataclass(frozen=True)
class ModelConfig:
    """Sparsity ``eta`` and variance ratio ``r`` with derived quantities.

    ``v = r/(1+r)`` is the oracle variance, ``lam = sqrt(2 v log(1/eta))`` the
    grid spacing and ``zeta = eta**v = exp(-lam**2/2)`` the grid decay ratio.
    """

    eta: float
    r: float
    v: float
    lam: float
    zeta: float

    @property
    def log_zeta(self):
        return self.v * math.log(self.eta)


def make_config(eta, r):
    eta = float(eta)
    r = float(r)
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if not (r > 0.0 and math.isfinite(r)):
        raise ValueError(f"r must be positive and finite, got {r}")
    v = r / (1.0 + r)
    log_inv_eta = -math.log(eta)
    lam = math.sqrt(2.0 * v * log_inv_eta)
    return ModelConfig(eta=eta, r=r, v=v, lam=lam, zeta=math.exp(-v * log_inv_eta))


def b_of_r(r):
    """Inner spacing factor min{4r(1+r)/(1+2r), 1}; equals 1 iff r >= r0."""
    r = float(r)
    if not r > 0.0:
        raise ValueError(f"r must be positive, got {r}")
    b = 4.0 * r * (1.0 + r) / (1.0 + 2.0 * r)
    if b >= 1.0 - _B_ONE_TOL:
        return 1.0
    return b


def K_of_b(b):
    """Inner-zone cardinality 1 + ceil(2 b^{-3/2})."""
    b = float(b)
    if not 0.0 < b <= 1.0:
        raise ValueError(f"b must lie in (0, 1], got {b}")
    return 1 + math.ceil(2.0 * b ** -1.5)


@dataclass(frozen=True)
class BiGridSpec:
    """Spacing/decay sequences of the discrete family and its normalisation.

    ``alpha`` and ``beta`` are piecewise linear in ``j`` with slopes ``b`` and
    ``b**2`` for ``j <= K`` and slope 1 afterwards.
    """

    b: float
    K: int
    c_eta: float

    def alpha(self, j):
        j = np.asarray(j, dtype=float)
        inner = 1.0 + self.b * (j - 1.0)
        outer = 1.0 + self.b * (self.K - 1) + (j - self.K)
        out = np.where(j <= self.K, inner, outer)
        return float(out) if out.ndim == 0 else out

    def beta(self, j):
        j = np.asarray(j, dtype=float)
        b2 = self.b * self.b
        inner = 1.0 + b2 * (j - 1.0)
        outer = 1.0 + b2 * (self.K - 1) + (j - self.K)
        out = np.where(j <= self.K, inner, outer)
        return float(out) if out.ndim == 0 else out

    def alpha_dot(self, j):
        j = np.asarray(j)
        out = np.where(j < self.K, self.b, 1.0)
        return float(out) if out.ndim == 0 else out

    def beta_dot(self, j):
        j = np.asarray(j)
        out = np.where(j < self.K, self.b * self.b, 1.0)
        return float(out) if out.ndim == 0 else out


def _one_minus_pow(log_base, power):
    # 1 - base**power computed without cancellation for base near 1
    return -math.expm1(power * log_base)


def normalising_constant(cfg, b, K):
    """c(eta) from 1/(2c) = (1-zeta^{b^2 K})/(1-zeta^{b^2}) + zeta^{b^2(K-1)+1}/(1-zeta)."""
    lz = cfg.log_zeta
    b2 = b * b
    inner = _one_minus_pow(lz, b2 * K) / _one_minus_pow(lz, b2)
    outer = math.exp(lz * (b2 * (K - 1) + 1.0)) / _one_minus_pow(lz, 1.0)
    return 1.0 / (2.0 * (inner + outer))


def bigrid_spec(cfg, b=None):
    """Spec of the discrete family; ``b=None`` picks the bi-grid value b(r)."""
    if b is None:
        b = b_of_r(cfg.r)
    K = K_of_b(b)
    return BiGridSpec(b=float(b), K=K, c_eta=normalising_constant(cfg, b, K))


def grid_spec(cfg):
    return bigrid_spec(cfg, b=1.0)


@dataclass(frozen=True)
class Slab:
    half_width: float
    mass: float


@dataclass(frozen=True)
class SparsePrior:
    """Point mass at zero, mirrored positive atoms and an optional uniform slab.

    ``mass[j]`` is the mass at ``+mu[j]``; the same mass sits at ``-mu[j]``.
    ``log_mass`` is carried alongside so kernels never take logs of underflowed
    masses.
    """

    weight_at_zero: float
    mu: np.ndarray = field(default_factory=lambda: np.empty(0))
    mass: np.ndarray = field(default_factory=lambda: np.empty(0))
    log_mass: np.ndarray = field(default_factory=lambda: np.empty(0))
    slab: Optional[Slab] = None

    def __post_init__(self):
        for name in ("mu", "mass", "log_mass"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not 0.0 < self.weight_at_zero <= 1.0:
            raise ValueError("weight_at_zero must lie in (0, 1]")
        if self.mu.shape != self.mass.shape or self.mu.shape != self.log_mass.shape:
            raise ValueError("atom arrays must have matching shapes")
        if self.mu.size:
            if self.mu[0] <= 0.0 or np.any(np.diff(self.mu) <= 0.0):
                raise ValueError("atom locations must be positive and strictly increasing")
            # masses far out may underflow; their logs must not
            if np.any(self.mass < 0.0) or not np.all(np.isfinite(self.log_mass)):
                raise ValueError("atom masses must be positive")
        if self.slab is not None and not (self.slab.half_width > 0 and 0 < self.slab.mass < 1):
            raise ValueError("slab needs half_width > 0 and mass in (0, 1)")

    @property
    def atoms(self):
        return list(zip(self.mu.tolist(), self.mass.tolist()))

    @property
    def log_ratio(self):
        """log(pi_j / pi_0) for the positive atoms."""
        return self.log_mass - math.log(self.weight_at_zero)

    @property
    def slab_log_coef(self):
        """log of slab_mass / (pi_0 * 2l * phi(0)), or -inf without a slab."""
        if self.slab is None:
            return -math.inf
        l = self.slab.half_width
        return (
            math.log(self.slab.mass)
            - math.log(self.weight_at_zero)
            - math.log(2.0 * l)
            + 0.5 * math.log(2.0 * math.pi)
        )

    @property
    def slab_half_width(self):
        return 0.0 if self.slab is None else self.slab.half_width

    def total_mass(self):
        slab = 0.0 if self.slab is None else self.slab.mass
        return self.weight_at_zero + 2.0 * float(np.sum(self.mass)) + slab

    def to_dict(self, spec=None):
        return {
            "weight_at_zero": self.weight_at_zero,
            "atoms": [{"mu": m, "mass": p} for m, p in self.atoms],
            "slab": None
            if self.slab is None
            else {"l": self.slab.half_width, "mass": self.slab.mass},
            "spec": None
            if spec is None
            else {"b": spec.b, "K": spec.K, "c_eta": spec.c_eta},
        }


def _check_build_args(cfg, theta_max, mass_tol):
    if cfg.eta >= 0.5:
        raise ValueError(f"grid-type priors need eta < 0.5, got {cfg.eta}")
    if not theta_max > 0.0:
        raise ValueError(f"theta_max must be positive, got {theta_max}")
    if not 0.0 < mass_tol <= 1e-12:
        raise ValueError(f"mass_tol must lie in (0, 1e-12], got {mass_tol}")


def discrete_prior(cfg, spec, theta_max, mass_tol=DEFAULT_MASS_TOL):
    """Truncated member of the discrete family described by ``spec``.

    Atoms run until ``lam*alpha_J >= theta_max + 15`` and the two-sided tail
    beyond J drops below ``mass_tol``; the exact geometric tail is then folded
    into atom J so the total mass stays 1.
    """
    _check_build_args(cfg, theta_max, mass_tol)
    lz = cfg.log_zeta
    log_c_eta = math.log(spec.c_eta) + math.log(cfg.eta)
    log_one_minus_zeta = math.log(_one_minus_pow(lz, 1.0))
    log_tol = math.log(mass_tol)
    J = spec.K
    while True:
        reach = cfg.lam * spec.alpha(J)
        # two-sided tail past J: 2 pi_J zeta / (1 - zeta)
        log_tail = math.log(2.0) + log_c_eta + (spec.beta(J) - 1.0) * lz + lz - log_one_minus_zeta
        if reach >= theta_max + ATOM_MARGIN and log_tail < log_tol:
            break
        J += 1
    j = np.arange(1, J + 1)
    mu = cfg.lam * spec.alpha(j)
    log_mass = log_c_eta + (spec.beta(j) - 1.0) * lz
    log_mass[-1] -= log_one_minus_zeta
    return SparsePrior(
        weight_at_zero=1.0 - cfg.eta,
        mu=mu,
        mass=np.exp(log_mass),
        log_mass=log_mass,
    )


def grid_prior(cfg, theta_max, mass_tol=DEFAULT_MASS_TOL):
    """Atoms at lam*j with per-side mass (eta/2)(1-zeta) zeta^(j-1)."""
    return discrete_prior(cfg, grid_spec(cfg), theta_max, mass_tol)


def bigrid_prior(cfg, theta_max, mass_tol=DEFAULT_MASS_TOL):
    spec = bigrid_spec(cfg)
    return discrete_prior(cfg, spec, theta_max, mass_tol), spec


def spike_slab_prior(eta, l):
    eta = float(eta)
    l = float(l)
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if not l > 0.0:
        raise ValueError(f"slab half-width must be positive, got {l}")
    return SparsePrior(weight_at_zero=1.0 - eta, slab=Slab(half_width=l, mass=eta))


def point_prior():
    return SparsePrior(weight_at_zero=1.0)


def theta_to_coords(theta, cfg, spec):
    """Write theta = lam*(alpha_l + omega) with l >= 1 and 0 <= omega < alpha_dot_l."""
    t = float(theta) / cfg.lam
    if t < 1.0:
        raise ValueError(f"theta must be >= lam = {cfg.lam}, got {theta}")
    alpha_K = spec.alpha(spec.K)
    if t < alpha_K:
        l = 1 + int(math.floor((t - 1.0) / spec.b))
        l = min(l, spec.K - 1)
    else:
        l = spec.K + int(math.floor(t - alpha_K))
    omega = t - spec.alpha(l)
    # floor() can land one cell off at exact boundaries
    while omega < 0.0 and l > 1:
        l -= 1
        omega = t - spec.alpha(l)
    while omega >= spec.alpha_dot(l):
        l += 1
        omega = t - spec.alpha(l)
    # a theta within rounding of the next support point is that support point
    if spec.alpha_dot(l) - omega <= _COORD_SNAP:
        l += 1
        omega = 0.0
    elif omega <= _COORD_SNAP:
        omega = 0.0
    return l, max(omega, 0.0)


def coords_to_theta(l, omega, cfg, spec):
    return cfg.lam * (spec.alpha(l) + omega)
