"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--sizes 16,32,64,128] [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from pstgraphs._backend import HAS_COMPILED, get_kernels
from pstgraphs.givens import tridiagonalize


def _time(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="8,16,32,64,128")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not HAS_COMPILED:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    py, cy = get_kernels("python"), get_kernels("cython")
    rng = np.random.default_rng(args.seed)

    print(f"{'kernel':<16}{'n':>6}{'python [s]':>14}{'cython [s]':>14}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        a = rng.normal(size=(n, n))
        h = a + a.T
        tp = _time(lambda: tridiagonalize(h, backend=py), args.repeat)
        tc = _time(lambda: tridiagonalize(h, backend=cy), args.repeat)
        print(f"{'tridiagonalize':<16}{n:>6}{tp:>14.3e}{tc:>14.3e}{tp / tc:>10.1f}")
    for n in (8, 64):
        lam = rng.normal(size=n)
        w = rng.normal(size=n)
        t = np.linspace(0, 10, 4096)
        tp = _time(lambda: py.transfer_grid(lam, w, t), args.repeat)
        tc = _time(lambda: cy.transfer_grid(lam, w, t), args.repeat)
        print(f"{'transfer_grid':<16}{n:>6}{tp:>14.3e}{tc:>14.3e}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
