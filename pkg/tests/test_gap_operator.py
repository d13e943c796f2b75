import os

import numpy as np
import pytest

from annulus_gibc.forward import AnnulusConfig, ImpedancePair, sigma_0, sigma_n
from annulus_gibc.fourier import grid_angles
from annulus_gibc.gap_operator import (
    GapMatrix,
    NoiseSpec,
    apply_noise,
    assemble_gap_matrix,
    export_gap_matrix_csv,
    hermitian_imag,
    load_gap_matrix,
    psd_sqrt,
    save_gap_matrix,
)

CFG = AnnulusConfig(0.5)
IMP = ImpedancePair(5 + 2j, 10 + 1j)


def test_matrix_is_circulant():
    a = assemble_gap_matrix(CFG, IMP).entries
    m = a.shape[0]
    for k in range(1, 4):
        rolled = np.roll(np.roll(a, k, axis=0), k, axis=1)
        assert np.abs(a - rolled).max() < 1e-12


def test_eigen_action_on_fourier_modes():
    # A e^{i n .} = lambda_n e^{i n .} with lambda_n = 2 |n| sigma_n / (sigma_n + 1)
    # and lambda_0 = sigma_0, exactly (trapezoid rule on band-limited kernels)
    a = assemble_gap_matrix(CFG, IMP).entries
    th = grid_angles(CFG.collocation_points)
    for n in range(0, CFG.kernel_truncation + 1):
        v = np.exp(1j * n * th)
        if n == 0:
            lam = sigma_0(CFG, IMP)
        else:
            s = sigma_n(n, CFG, IMP)
            lam = 2 * n * s / (s + 1)
        assert np.abs(a @ v - lam * v).max() < 1e-10


def test_eigenvalues_have_negative_imaginary_part():
    for n in range(1, CFG.kernel_truncation + 1):
        s = sigma_n(n, CFG, IMP)
        lam = 2 * n * s / (s + 1)
        assert lam.imag < 0.0
    assert sigma_0(CFG, IMP).imag < 0.0


def test_noise_is_deterministic_and_scaled():
    a = assemble_gap_matrix(CFG, IMP)
    n1 = apply_noise(a, NoiseSpec(0.02, seed=5))
    n2 = apply_noise(a, NoiseSpec(0.02, seed=5))
    assert np.array_equal(n1.entries, n2.entries)
    n3 = apply_noise(a, NoiseSpec(0.02, seed=6))
    assert not np.array_equal(n1.entries, n3.entries)
    # perturbation matrix has unit spectral norm before scaling by delta
    e = (n1.entries - a.entries) / a.entries / 0.02
    assert abs(np.linalg.norm(e, 2) - 1.0) < 1e-12


def test_zero_noise_is_identity():
    a = assemble_gap_matrix(CFG, IMP)
    n0 = apply_noise(a, NoiseSpec(0.0, seed=5))
    assert np.array_equal(n0.entries, a.entries)
    assert n0.entries is not a.entries  # still a copy


def test_hermitian_imag_orientation():
    # For A = i I the quadratic form <f, A f> has imaginary part -|f|^2,
    # so the extracted part must be -I, not +I.
    a = 1j * np.eye(4)
    h = hermitian_imag(a)
    assert np.abs(h + np.eye(4)).max() < 1e-15
    # Hermitian input carries no imaginary part
    b = np.array([[2.0, 1 + 1j], [1 - 1j, 3.0]])
    assert np.abs(hermitian_imag(b)).max() < 1e-15


def test_hermitian_imag_of_gap_matrix_is_psd():
    a = assemble_gap_matrix(CFG, IMP)
    h = hermitian_imag(a)
    assert np.abs(h - h.conj().T).max() == 0.0
    w = np.linalg.eigvalsh(h)
    assert w.min() >= -1e-10 * w.max()


def test_psd_sqrt_diagonal():
    h = np.diag([4.0, 1.0, 0.0]).astype(complex)
    s = psd_sqrt(h)
    assert np.abs(s - np.diag([2.0, 1.0, 0.0])).max() < 1e-14


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(2)
    b = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    h = b.conj().T @ b
    s = psd_sqrt(h)
    assert np.abs(s - s.conj().T).max() < 1e-13
    assert np.abs(s @ s - h).max() < 1e-10 * np.linalg.norm(h, 2)


def test_psd_sqrt_clamps_negative_part():
    h = np.diag([1.0, -1e-3]).astype(complex)
    s = psd_sqrt(h)
    assert np.abs(s - np.diag([1.0, 0.0])).max() < 1e-14


def test_container_roundtrip_is_bit_exact(tmp_path):
    a = apply_noise(assemble_gap_matrix(CFG, IMP), NoiseSpec(0.02, 3))
    path = os.path.join(tmp_path, "m.gap")
    save_gap_matrix(a, path)
    b = load_gap_matrix(path)
    assert np.array_equal(a.entries, b.entries)
    assert b.config.rho == CFG.rho
    assert b.config.kernel_truncation == CFG.kernel_truncation
    assert b.imp.eta == IMP.eta
    assert b.imp.gamma == IMP.gamma
    assert b.noise == NoiseSpec(0.02, 3)
    # writing an identical matrix must produce identical bytes
    path2 = os.path.join(tmp_path, "m2.gap")
    save_gap_matrix(b, path2)
    assert open(path, "rb").read() == open(path2, "rb").read()


def test_container_rejects_corruption(tmp_path):
    a = assemble_gap_matrix(CFG, IMP)
    path = os.path.join(tmp_path, "m.gap")
    save_gap_matrix(a, path)
    blob = open(path, "rb").read()
    open(path, "wb").write(blob[:-16])  # truncate payload
    with pytest.raises(ValueError):
        load_gap_matrix(path)
    open(path, "wb").write(b"not a header\n" + blob.split(b"\n", 1)[1])
    with pytest.raises(ValueError):
        load_gap_matrix(path)


def test_csv_export_format(tmp_path):
    a = assemble_gap_matrix(AnnulusConfig(0.5, 2, 8), IMP)
    path = os.path.join(tmp_path, "m.csv")
    export_gap_matrix_csv(a, path)
    lines = open(path).read().splitlines()
    header = lines[0].split(",")
    assert header[0] == "re_0" and header[1] == "im_0"
    assert len(lines) == 9
    row = [float(tok) for tok in lines[1].split(",")]
    assert abs(row[0] - a.entries[0, 0].real) < 1e-16
    assert abs(row[1] - a.entries[0, 0].imag) < 1e-16
    # 17 significant digits reproduce the double exactly
    assert row[0] == a.entries[0, 0].real
