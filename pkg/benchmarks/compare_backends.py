#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the raw hot kernels and the end-to-end sums on both backends and
prints a speedup table.  The backend can also be forced globally through
DUSTCOCYCLE_BACKEND=numba|numpy for any other entry point.

Usage:
    python benchmarks/compare_backends.py [--level 10] [--matrix-level 8] [--repeats 3]
"""

import argparse
import time

import numpy as np

from dustcocycle import _kernels as K
from dustcocycle.cocycle import pairing_n, phi_n, pullback_projection, resolve_functions
from dustcocycle.geometry import get_preset
from dustcocycle.oracle import bott_projection

DUST = get_preset("cantor-dust")


def best_of(repeats, fn, *args, **kwargs):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_raw_kernels(repeats, size=1 << 20):
    rng = np.random.default_rng(11)
    words = rng.integers(0, 4**12, size=size).astype(np.int64)
    offx, offy = DUST.offset_arrays()
    scalars = [rng.standard_normal(size).astype(np.complex128) for _ in range(12)]
    mats = [np.ascontiguousarray(
        rng.standard_normal((size // 16, 2, 2)) + 1j * rng.standard_normal((size // 16, 2, 2))
    ) for _ in range(12)]
    vals = scalars[0]

    rows = []
    for name, np_fn, jit_fn, args in (
        ("corner digits", K.corner_numerators_np, K._corner_numerators_jit, (words, 12, offx, offy)),
        ("image bits", K.dust_image_bits_np, K._dust_image_bits_jit, (words, 12)),
        ("scalar kernel", K.scalar_kernel_np, K._scalar_kernel_jit, tuple(scalars)),
        ("matrix kernel", K.matrix_kernel_np, K._matrix_kernel_jit, tuple(mats)),
        ("leaf sums", lambda v: K.leaf_sums_np(v, 4096), lambda v: K._leaf_sums_jit(v, np.int64(4096)), (vals,)),
    ):
        jit_fn(*args)  # compile before timing
        t_np, _ = best_of(repeats, np_fn, *args)
        t_jit, _ = best_of(repeats, jit_fn, *args)
        rows.append((name, t_np, t_jit))
    return rows


def bench_end_to_end(repeats, level, matrix_level, workers):
    f, g, h, _, _ = resolve_functions("bott-flux")
    df, dg, dh, _, _ = resolve_functions("linear-xy")
    proj = pullback_projection(bott_projection(1))
    cases = [
        (f"phi pullback n={level}", lambda: phi_n(DUST, level, f, g, h, workers=workers)),
        (f"phi direct n={level}", lambda: phi_n(DUST, level, df, dg, dh, workers=workers)),
        (f"pairing n={matrix_level}", lambda: pairing_n(DUST, matrix_level, proj, workers=workers)),
    ]
    rows = []
    for name, call in cases:
        timings = {}
        values = {}
        for backend in ("numba", "numpy"):
            K.use_backend(backend)
            call()  # warm (JIT and caches)
            timings[backend], values[backend] = best_of(repeats, call)
        drift = abs(values["numba"] - values["numpy"]) / max(1.0, abs(values["numba"]))
        rows.append((name, timings["numpy"], timings["numba"], drift))
    K.use_backend("auto")
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--level", type=int, default=10, help="scalar sum level")
    ap.add_argument("--matrix-level", type=int, default=8, help="matrix pairing level")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"== raw kernels (best of {args.repeats}) ==")
    print(f"{'kernel':<16} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, t_np, t_jit in bench_raw_kernels(args.repeats):
        print(f"{name:<16} {t_np * 1e3:>8.1f}ms {t_jit * 1e3:>8.1f}ms {t_np / t_jit:>7.2f}x")

    print(f"\n== end to end (best of {args.repeats}, workers={args.workers}) ==")
    print(f"{'case':<22} {'numpy':>10} {'numba':>10} {'speedup':>8} {'value drift':>12}")
    for name, t_np, t_jit, drift in bench_end_to_end(
        args.repeats, args.level, args.matrix_level, args.workers
    ):
        print(
            f"{name:<22} {t_np:>9.2f}s {t_jit:>9.2f}s {t_np / t_jit:>7.2f}x {drift:>12.1e}"
        )


if __name__ == "__main__":
    main()
