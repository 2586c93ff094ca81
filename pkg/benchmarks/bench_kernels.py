"""Time the compiled and numpy integrand kernels on identical inputs.

Run ``python benchmarks/bench_kernels.py``; prints per-call timings, the
speed-up, and the largest difference between the two backends.
"""
import argparse
import timeit

import numpy as np

from u2casimir import _pykernels
from u2casimir.boundary import random_admissible
from u2casimir.scattering import Delta, PiecewiseConstant, SquareBarrier

try:
    from u2casimir import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(n):
    kappa = np.geomspace(1e-4, 40.0, n)
    bc = random_admissible(np.random.default_rng(0))
    yield "plate bracket", lambda k: k.plate_bracket(bc.det_u, bc.tr_u, bc.offdiag_sum, kappa, 1.0)
    for v in (Delta(10.0), SquareBarrier(3.0, 0.4),
              PiecewiseConstant(tuple((float(i), 0.05) for i in range(8)))):
        el, w = v.elements(), v.support_width
        yield f"comb {v.grammar()[:24]}", (lambda el, w: lambda k: k.comb_integrand(el, kappa, 0.7, 1.0, w))(el, w)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=4096, help="kappa samples per call")
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels unavailable; nothing to compare")
        return
    print(f"{'kernel':34s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s} {'max |diff|':>11s}")
    for name, call in cases(args.points):
        tp = min(timeit.repeat(lambda: call(_pykernels), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: call(_ckernels), number=1, repeat=args.repeat))
        diff = np.max(np.abs(call(_pykernels) - call(_ckernels)) / (1 + np.abs(call(_pykernels))))
        print(f"{name:34s} {1e3 * tp:12.3f} {1e3 * tc:12.3f} {tp / tc:9.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
