"""Compare the numba kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 256 1024 2048] [--repeat 5] [--end-to-end]

Kernel timings import both backends side by side. The end-to-end timing runs
a short synthesis in a subprocess per backend, selected through
CSYNTH_DISABLE_NUMBA, so it measures what a user of the CLI would see.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from csynth.kernels import _numba as nb
from csynth.kernels import _numpy as npk

E2E = """
import time
from csynth import greedy as g
from csynth.core import RandomSource
from csynth.hadamard import build_hadamard, hadamard_certificate
import numpy as np
h = build_hadamard({nu})
A, Y = np.array(h.matrix), np.array(hadamard_certificate(h))
g.run_derandomized(Y, A, "aprime", "closed", 2, rng=RandomSource(0))  # warm-up / compile
t = time.perf_counter()
g.run_derandomized(Y, A, "aprime", "closed", {steps}, rng=RandomSource(0))
print(time.perf_counter() - t)
"""


def best_of(fn, repeat):
    fn()  # compile / warm caches
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_cases(n, rs):
    z = rs.standard_normal((n, n)) * 0.3
    beta = 0.7
    small = min(n, 64)
    B = rs.standard_normal((small, small))
    zl, al = rs.standard_normal(small), rs.standard_normal(small)
    G0 = np.asfortranarray(rs.standard_normal((small, small // 2)))
    return [
        (f"potential_value   {n}x{n}", lambda m: m.potential_value(z, beta)),
        (f"value_grad        {n}x{n}", lambda m: m.potential_value_grad(z, beta)),
        (f"linesearch        {small}x{small}", lambda m: m.linesearch(B, zl, al, beta, 1e-12, 200)),
        (f"coord_roots       {small}x{small}", lambda m: m.coord_roots(B, al, beta, 1e-12, 200)),
        (
            f"jacobi_sweeps     {small}x{small // 2}",
            lambda m: m.jacobi_sweeps(G0.copy(order="F"), np.eye(small // 2, order="F"), 1e-12, 60),
        ),
    ]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 2048])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--end-to-end", action="store_true", help="also time a short H_8 synthesis per backend")
    p.add_argument("--nu", type=int, default=8)
    p.add_argument("--steps", type=int, default=60)
    args = p.parse_args(argv)

    rs = np.random.default_rng(0)
    print(f"{'kernel':34s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s}")
    for n in args.sizes:
        for name, fn in kernel_cases(n, rs):
            t_nb = best_of(lambda: fn(nb), args.repeat)
            t_np = best_of(lambda: fn(npk), args.repeat)
            print(f"{name:34s} {t_nb:11.5f} {t_np:11.5f} {t_np / t_nb:8.2f}")

    if args.end_to_end:
        code = E2E.format(nu=args.nu, steps=args.steps)
        res = {}
        for label, flag in (("numba", "0"), ("numpy", "1")):
            env = dict(os.environ, CSYNTH_DISABLE_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
            res[label] = float(out.stdout.strip().splitlines()[-1])
        print(
            f"synthesis H_{args.nu}, {args.steps} aprime steps: numba {res['numba']:.3f} s, "
            f"numpy {res['numpy']:.3f} s, speedup {res['numpy'] / res['numba']:.2f}"
        )


if __name__ == "__main__":
    main()
