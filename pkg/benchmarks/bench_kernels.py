"""Time the numba and numpy kernel paths on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both implementations live side by side in ``wright_lab._kernels``, so one
process can time both without toggling ``WRIGHT_LAB_DISABLE_NUMBA``.
"""

import argparse
import math
import time

import numpy as np

from wright_lab import _kernels as K
from wright_lab._accel import njit
from wright_lab.special_fn import log_wright_phi_exact


@njit
def _lgamma_loop(xs):
    out = np.empty(xs.size)
    for i in range(xs.size):
        out[i] = K.lgamma_scalar(xs[i])
    return out


def _best(fn, repeat):
    fn()  # warm-up (JIT compile / cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    for z in (1.0, 1e2, 1e4, 1e6):
        args = (0.0, math.log(z), 1.0, 2.0, 1e-12, 100_000)
        yield f"series  z={z:g}", (lambda a=args: K._series_log_sum_nb(*a)), \
            (lambda a=args: K._series_log_sum_np(*a))
    for n, x in ((10, 1.0), (1000, 2.0), (10000, 5.0)):
        norm = log_wright_phi_exact(2.0, n * x)
        args = (math.log(n * x), 2.0, float(n), 1e-12, 4, norm, 100_000)
        yield f"weights n={n} x={x:g}", (lambda a=args: K._operator_weights_nb(*a)), \
            (lambda a=args: K._operator_weights_np(*a))
    xs = np.linspace(0.1, 5e3, 20_000)
    yield "lgamma  20k points", (lambda: _lgamma_loop(xs)), \
        (lambda: K.lgamma_array(xs))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'case':<24}{'numba [ms]':>12}{'numpy [ms]':>12}{'ratio':>8}")
    for name, nb, npy in cases():
        a, b = _best(nb, args.repeat), _best(npy, args.repeat)
        print(f"{name:<24}{a * 1e3:>12.3f}{b * 1e3:>12.3f}{b / a:>8.1f}")


if __name__ == "__main__":
    main()
