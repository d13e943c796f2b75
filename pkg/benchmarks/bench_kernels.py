"""Timing comparison of the jit-compiled kernels against the numpy fallbacks.

Run as: python benchmarks/bench_kernels.py [--repeats N]
The jit path needs numba; without it the script times the fallbacks only.
"""
import argparse
import time

import numpy as np

from annulus_gibc import _kernels
from annulus_gibc.fourier import grid_angles
from annulus_gibc.forward import AnnulusConfig, ImpedancePair, kernel_weight, sigma_0
from annulus_gibc.gap_operator import assemble_gap_matrix, hermitian_imag
from annulus_gibc.sampling import _poisson_rhs_batch


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def gap_cases():
    imp = ImpedancePair(5 + 2j, 10 + 1j)
    for m in (64, 256, 512):
        cfg = AnnulusConfig(0.5, 20, m)
        angles = grid_angles(m)
        weights = np.array(
            [kernel_weight(n, cfg, imp) for n in range(1, cfg.kernel_truncation + 1)],
            dtype=complex,
        )
        sigma0 = complex(sigma_0(cfg, imp))
        scale = 2 * np.pi / m
        yield (
            f"gap matrix m={m}",
            lambda a=angles, w=weights, s=scale: _kernels.gap_matrix_entries(
                a, sigma0, w, s
            ),
            lambda a=angles, w=weights, s=scale: _kernels._gap_matrix_numpy(
                a, sigma0, w, s
            ),
        )


def morozov_cases():
    imp = ImpedancePair(5 + 2j, 10 + 1j)
    cfg = AnnulusConfig(0.5)
    h = hermitian_imag(assemble_gap_matrix(cfg, imp))
    d, u = np.linalg.eigh(h)
    for npts in (1000, 8000):
        rng = np.random.default_rng(0)
        pts = rng.uniform(-0.6, 0.6, size=(npts, 2))
        b = _poisson_rhs_batch(pts, cfg.collocation_points)
        beta2 = (np.abs(u.conj().T @ b) ** 2).T.copy()
        targets = 0.02 * 1.2 * np.linalg.norm(b, axis=0)
        d2 = d * d
        yield (
            f"morozov batch p={npts}",
            lambda b=beta2, t=targets: _kernels.morozov_batch(
                d2, b, t, 1e-16, 1e4, 1e-3, 200
            ),
            lambda b=beta2, t=targets: _kernels._morozov_batch_numpy(
                d2, b, t, 1e-16, 1e4, 1e-3, 200
            ),
        )


def marching_cases():
    for res in (101, 201, 401):
        xs = np.linspace(-1, 1, res)
        ys = np.linspace(-1, 1, res)
        xx, yy = np.meshgrid(xs, ys)
        vals = np.exp(-2 * np.hypot(xx, yy))
        vals[np.hypot(xx, yy) > 0.9] = np.nan
        yield (
            f"marching {res}x{res}",
            lambda v=vals, x=xs, y=ys: _kernels.marching_cells(v, x, y, 0.3),
            lambda v=vals, x=xs, y=ys: _kernels._marching_cells_impl(v, x, y, 0.3),
        )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not _kernels.HAS_NUMBA:
        print("numba unavailable (or disabled); timing the numpy fallbacks only")

    rows = []
    for name, fast, fallback in (
        list(gap_cases()) + list(morozov_cases()) + list(marching_cases())
    ):
        if _kernels.HAS_NUMBA:
            fast()  # compile outside the timed region
            t_fast = best_of(fast, args.repeats)
        else:
            t_fast = float("nan")
        t_fallback = best_of(fallback, args.repeats)
        rows.append((name, t_fast, t_fallback))

    header = f"{'kernel':<24} {'jit (ms)':>10} {'numpy (ms)':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, t_fast, t_fallback in rows:
        if np.isnan(t_fast):
            print(f"{name:<24} {'-':>10} {t_fallback * 1e3:>12.3f} {'-':>9}")
        else:
            print(
                f"{name:<24} {t_fast * 1e3:>10.3f} {t_fallback * 1e3:>12.3f}"
                f" {t_fallback / t_fast:>8.1f}x"
            )


if __name__ == "__main__":
    main()
