"""Parity between the jit-compiled kernels and the plain numpy fallbacks."""
import os
import subprocess
import sys

import numpy as np

from annulus_gibc import _kernels
from annulus_gibc.fourier import grid_angles


def test_gap_matrix_paths_agree():
    angles = grid_angles(32)
    rng = np.random.default_rng(1)
    weights = (rng.standard_normal(12) + 1j * rng.standard_normal(12)) * 0.1
    sigma0 = 0.3 - 0.2j
    a = _kernels._gap_matrix_impl(angles, sigma0, weights, 0.19)
    b = _kernels._gap_matrix_numpy(angles, sigma0, weights, 0.19)
    assert np.abs(a - b).max() < 1e-14


def test_morozov_paths_agree():
    rng = np.random.default_rng(2)
    d2 = np.abs(rng.standard_normal(16)) ** 2
    bmag2 = np.abs(rng.standard_normal((5, 16))) ** 2
    targets = np.full(5, 0.4)
    a_j, f_j = _kernels._morozov_batch_impl(d2, bmag2, targets, 1e-16, 1e4, 1e-3, 200)
    a_n, f_n = _kernels._morozov_batch_numpy(d2, bmag2, targets, 1e-16, 1e4, 1e-3, 200)
    assert np.array_equal(f_j, f_n)
    assert np.abs((a_j - a_n) / a_j).max() < 1e-10


def test_marching_paths_agree():
    # the marching kernel has a single source, run jitted or as plain python
    xs = np.linspace(-1, 1, 21)
    ys = np.linspace(-1, 1, 21)
    xx, yy = np.meshgrid(xs, ys)
    vals = np.exp(-np.hypot(xx, yy))
    vals[np.hypot(xx, yy) > 0.9] = np.nan
    s_j, k_j = _kernels.marching_cells(vals, xs, ys, 0.5)
    s_n, k_n = _kernels._marching_cells_impl(vals, xs, ys, 0.5)
    assert np.array_equal(np.asarray(k_j), np.asarray(k_n))
    assert np.abs(np.asarray(s_j) - np.asarray(s_n)).max() < 1e-14


def test_env_flag_forces_numpy_backend():
    env = dict(os.environ)
    env["ANNULUS_GIBC_NO_NUMBA"] = "1"
    out = subprocess.run(
        [sys.executable, "-c", "from annulus_gibc import _kernels; print(_kernels.BACKEND)"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_backend_constant_consistent():
    assert _kernels.BACKEND in ("numba", "numpy")
    assert _kernels.BACKEND == ("numba" if _kernels.HAS_NUMBA else "numpy")
