"""Compare the compiled and numpy determinant kernels on the theta2/theta3 arm-block sweep.

    python benchmarks/bench_kernels.py [--repeat 5] [--threads 1,2,4]
"""

import argparse
import math
import time

import numpy as np

from kinsa import _backend
from kinsa.model import builtin


def sweep_grid(n=6, step=1.0):
    deg = np.arange(0, 360, step)
    t2, t3 = np.meshgrid(np.radians(deg), np.radians(deg), indexing="ij")
    Q = np.zeros((t2.size, n))
    Q[:, 1] = t2.ravel()
    Q[:, 2] = t3.ravel()
    Q[:, 4] = math.pi / 2
    return Q


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--threads", default="1,2,4")
    parser.add_argument("--robot", default="wam6-code")
    args = parser.parse_args()

    model = builtin(args.robot)
    Q = sweep_grid(model.n)
    print(f"{model.name}: {len(Q)} configurations, extension available: {_backend.HAVE_EXTENSION}")
    print(f"{'backend':<8} {'threads':>7} {'seconds':>9} {'configs/s':>12}")
    reference = _backend.chain_dets(model, Q, threads=1, backend="python")
    baseline = None
    for backend in _backend.BACKENDS[::-1]:
        for threads in (int(t) for t in args.threads.split(",")):
            out = _backend.chain_dets(model, Q, threads=threads, backend=backend)
            assert np.abs(out - reference).max() <= 1e-13
            t = best_of(lambda: _backend.chain_dets(model, Q, threads=threads, backend=backend), args.repeat)
            baseline = baseline or t
            print(f"{backend:<8} {threads:>7} {t:>9.4f} {len(Q) / t:>12.0f}   x{baseline / t:.1f}")


if __name__ == "__main__":
    main()
