"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import math
import timeit

import numpy as np

from kmetro import _kernels_py

try:
    from kmetro import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

CASES = [
    ("wigner_d_matrix 2J=50", "wigner_d_matrix", (50, math.pi / 4)),
    ("wigner_d_matrix 2J=400", "wigner_d_matrix", (400, 1.1)),
    ("wigner_d_matrix 2J=2000", "wigner_d_matrix", (2000, 0.3)),
    ("composition_extremes n=16 k=4", "composition_extremes", ((-0.5, 0.5), 16, 4, True)),
    ("composition_extremes 3 levels n=40 k=3", "composition_extremes", ((-1.0, 0.0, 1.0), 40, 3, False)),
]


def best_of(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{'case':42s} {'python':>12s} {'cython':>12s} {'speedup':>8s}")
    for label, name, call in CASES:
        t_py = best_of(getattr(_kernels_py, name), call, args.repeat)
        if _compiled is None:
            print(f"{label:42s} {t_py * 1e3:10.3f}ms {'-':>12s} {'-':>8s}")
            continue
        fc = getattr(_compiled, name)
        a, b = fc(*call), getattr(_kernels_py, name)(*call)
        if isinstance(a, np.ndarray):
            assert np.allclose(a, b, rtol=0, atol=1e-13), label
        t_c = best_of(fc, call, args.repeat)
        print(f"{label:42s} {t_py * 1e3:10.3f}ms {t_c * 1e3:10.3f}ms {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
