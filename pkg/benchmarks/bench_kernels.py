"""Time the E log N kernel under numba and under plain numpy.

    python3 benchmarks/bench_kernels.py [--thetas 256] [--order 1024] [--repeat 3]

Both backends are called directly, so the JIT switch does not matter here
(run with the switch off, the "numba" column is the uncompiled Python loop).
"""

import argparse
import time

import numpy as np

from sparse_pde import _kernels
from sparse_pde._jit import USE_NUMBA
from sparse_pde.numerics import make_quadrature
from sparse_pde.priors import make_config
from sparse_pde.risk import EstimatorKind, _kernel_args, prior_for

CASES = [
    ("grid", 0.1, 1.0),
    ("bigrid", 0.1, 0.1),
    ("bigrid", 1e-10, 0.25),
    ("ss", 0.001, 0.5),
]


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--thetas", type=int, default=256)
    ap.add_argument("--order", type=int, default=1024)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rule = make_quadrature(args.order)
    print(f"numba enabled: {USE_NUMBA}; {args.thetas} thetas x {rule.order} nodes")
    print(f"{'case':<22}{'atoms':>6}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>9}{'max |diff|':>12}")
    for name, eta, r in CASES:
        cfg = make_config(eta, r)
        kind = EstimatorKind.spike_slab(5 * cfg.lam) if name == "ss" else EstimatorKind(name)
        prior = prior_for(kind, cfg)
        mu, logw, slab_logc, slab_l = _kernel_args(prior)
        thetas = np.linspace(0.0, 5.0 * cfg.lam, args.thetas)
        call = (thetas, rule.nodes, rule.weights, mu, logw, slab_logc, slab_l, cfg.v)
        _kernels._e_log_n_numba(*call)  # compile / load cache outside the timing
        t_nb, a = best_of(lambda: _kernels._e_log_n_numba(*call), args.repeat)
        t_np, b = best_of(lambda: _kernels._e_log_n_numpy(*call), args.repeat)
        label = f"{name} eta={eta:g} r={r:g}"
        print(f"{label:<22}{mu.size:>6}{t_nb:>12.3f}{t_np:>12.3f}{t_np / t_nb:>9.1f}"
              f"{np.max(np.abs(a - b)):>12.1e}")


if __name__ == "__main__":
    main()
