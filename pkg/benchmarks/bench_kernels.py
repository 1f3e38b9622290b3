"""Compare the numba and numpy batch kernels on random navigation data.

    python benchmarks/bench_kernels.py [--points N] [--dim N] [--repeat N]

Prints the best wall time per kernel and backend, and the largest
disagreement between the two backends.
"""

import argparse
import time

import numpy as np

from zermelo import kernels
from zermelo.riemannian import SpaceForm, affine_field


def best_time(fn, args, repeat):
    fn(*args)  # compile / warm up
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=100_000)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    space = SpaceForm(args.dim, -1.0, "poincare_ball")
    W = affine_field(args.dim, e=0.05 * rng.normal(size=args.dim))
    X = space.sample(rng, args.points, 0.5)
    H = space.metric_batch(X)
    Wup = W.eval_batch(X)
    Y = rng.normal(size=X.shape)

    pairs = [
        ("navigation", kernels.navigation_batch_numpy, kernels.navigation_batch_numba),
        ("fundamental tensor", kernels.fundamental_tensor_batch_numpy, kernels.fundamental_tensor_batch_numba),
        ("dual / inverse Legendre", kernels.dual_batch_numpy, kernels.dual_batch_numba),
    ]
    print(f"{args.points} points, dim {args.dim}, default backend: {kernels.backend()}")
    print(f"{'kernel':<26}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, f_np, f_nb in pairs:
        t_np = best_time(f_np, (H, Wup, Y), args.repeat)
        t_nb = best_time(f_nb, (H, Wup, Y), args.repeat)
        a, b = f_np(H, Wup, Y), f_nb(H, Wup, Y)
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        diff = max(float(np.max(np.abs(u - v) / np.maximum(1.0, np.abs(u)))) for u, v in zip(a, b))
        print(f"{name:<26}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.2f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
