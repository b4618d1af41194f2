#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the two hot sums on workloads representative of production use: the
image kernel at the lattice sizes the auto-truncation actually picks
(N_img = 3 and 6 -> 2744 and 17576 terms) and the mode kernel from the
spectral-sum size (~500 modes) up to naive-sum sizes (~500k modes).

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from cavdd import _kernels_np
from cavdd.core import CavityGeometry
from cavdd.ewald import gamma_cutoff, image_lattice
from cavdd.modes import mode_table

try:
    from cavdd import _kernels as _compiled
except ImportError:
    _compiled = None


def timeit(fn, *args, repeat=5, **kw):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args, **kw)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    g = CavityGeometry(1.0, 1.0, 1.0)
    r1 = np.array([0.37, 0.52, 0.41])
    r2 = np.array([0.61, 0.33, 0.57])
    k, Kc = 20.0, 0.8862269254527581

    print(f"{'kernel':<28}{'terms':>9}{'numpy':>12}{'cython':>12}{'speedup':>9}")
    for n_img in (3, 6):
        lat = image_lattice(r1, g, n_img)
        args = (r2, lat.positions, lat.signs, lat.jacobians, k, Kc)
        t_np = timeit(_kernels_np.image_sum, *args)
        row = f"{'image_sum (N_img=%d)' % n_img:<28}{len(lat):>9}{t_np * 1e3:>10.3f}ms"
        if _compiled is not None:
            t_cy = timeit(_compiled.image_sum, *args)
            row += f"{t_cy * 1e3:>10.3f}ms{t_np / t_cy:>8.1f}x"
        print(row)

    for kmax in (30.0, 80.0, 320.0):
        table = mode_table(g, kmax)
        w = gamma_cutoff(k, table.k, Kc) if kmax < 50 else 1.0 / (table.k**2 - k * k)
        w = np.ascontiguousarray(w)
        args = (r2, r1, table.kvec, table.nf, w)
        t_np = timeit(_kernels_np.mode_sum, *args, with_dyadic=True)
        row = f"{'mode_sum (kmax=%g)' % kmax:<28}{len(table):>9}{t_np * 1e3:>10.3f}ms"
        if _compiled is not None:
            t_cy = timeit(_compiled.mode_sum, *args, with_dyadic=True)
            row += f"{t_cy * 1e3:>10.3f}ms{t_np / t_cy:>8.1f}x"
        print(row)

    if _compiled is None:
        print("\ncompiled extension not available; numpy fallback only")


if __name__ == "__main__":
    main()
