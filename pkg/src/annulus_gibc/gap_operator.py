"""Dense discretization of the current-gap operator, its noise model, and the
Hermitian square-root machinery used by the sampling solver.

The collocation matrix of the convolution kernel on the left-endpoint grid is
circulant; applied to the discrete Fourier vector e^{in theta_j} it returns
the exact eigenvalue 2|n| sigma_n/(sigma_n + 1) (and sigma_0 for n = 0)
whenever M > 2N, which the tests use as the assembly oracle.

The Hermitian imaginary part is taken with respect to the measurement pairing
<phi, psi> = int phi conj(psi) ds, which conjugates the second slot, so
Im <f, A f> = f^H (A^H - A)/(2i) f and hermitian_imag returns (A^H - A)/(2i).
With absorbing impedance coefficients this matrix is positive semidefinite.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .forward import AnnulusConfig, ImpedancePair, kernel_weight, sigma_0
from .fourier import grid_angles

CONTAINER_MAGIC = "annulus-gibc gap-matrix v1"


@dataclass(frozen=True)
class NoiseSpec:
    """Relative multiplicative noise level and the seed of its realization."""

    delta: float
    seed: int = 0

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError(f"noise level must be nonnegative, got {self.delta}")


@dataclass(frozen=True)
class GapMatrix:
    """Dense M x M collocation matrix of the current-gap operator."""

    entries: np.ndarray
    config: AnnulusConfig
    imp: ImpedancePair
    noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"entries must be square, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "entries", entries)

    @property
    def m(self) -> int:
        return self.entries.shape[0]


def assemble_gap_matrix(config: AnnulusConfig, imp: ImpedancePair) -> GapMatrix:
    """Collocation matrix entries[i, j] = K(theta_i, theta_j) * (2*pi/M)."""
    m = config.collocation_points
    angles = grid_angles(m)
    weights = np.array(
        [kernel_weight(n, config, imp) for n in range(1, config.kernel_truncation + 1)],
        dtype=complex,
    )
    entries = _kernels.gap_matrix_entries(
        angles, complex(sigma_0(config, imp)), weights, 2.0 * np.pi / m
    )
    return GapMatrix(entries, config, imp)


def apply_noise(a: GapMatrix, noise: NoiseSpec) -> GapMatrix:
    """Entrywise multiplicative noise A_ij (1 + delta E_ij), ||E||_2 = 1.

    E is drawn i.i.d. uniform on [-1, 1] from a seeded PCG64 generator and
    normalized by its spectral norm, so the perturbation is deterministic
    given (delta, seed); delta = 0 reproduces A bit-for-bit.
    """
    if noise.delta == 0:
        return GapMatrix(a.entries.copy(), a.config, a.imp, noise)
    rng = np.random.default_rng(noise.seed)
    e = rng.uniform(-1.0, 1.0, size=(a.m, a.m))
    e /= np.linalg.norm(e, 2)
    return GapMatrix(a.entries * (1.0 + noise.delta * e), a.config, a.imp, noise)


def hermitian_imag(a) -> np.ndarray:
    """Imaginary part (A^H - A)/(2i) of a matrix under the conjugate-second-slot pairing."""
    entries = a.entries if isinstance(a, GapMatrix) else np.asarray(a, dtype=complex)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"need a square matrix, got shape {entries.shape}")
    h = (entries.conj().T - entries) / 2j
    return (h + h.conj().T) / 2.0


def psd_sqrt(h: np.ndarray) -> np.ndarray:
    """Positive square root V clamp(Sigma)^{1/2} V^H of a Hermitian matrix.

    Eigenvalues pushed negative by noise are clamped to zero before the root,
    so the result squared reproduces the clamped matrix.
    """
    w, v = np.linalg.eigh(h)
    s = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return (s + s.conj().T) / 2.0


def _header(a: GapMatrix) -> dict:
    return {
        "magic": CONTAINER_MAGIC,
        "m": a.m,
        "rho": a.config.rho,
        "kernel_truncation": a.config.kernel_truncation,
        "eta": [a.imp.eta.real, a.imp.eta.imag],
        "gamma": [a.imp.gamma.real, a.imp.gamma.imag],
        "delta": None if a.noise is None else a.noise.delta,
        "seed": None if a.noise is None else a.noise.seed,
    }


def save_gap_matrix(a: GapMatrix, path: str) -> None:
    """Write the single-file container: one JSON header line, then the
    row-major little-endian complex128 entries."""
    header = json.dumps(_header(a), sort_keys=True)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii") + b"\n")
        fh.write(np.ascontiguousarray(a.entries, dtype="<c16").tobytes())


def load_gap_matrix(path: str) -> GapMatrix:
    """Read a container written by save_gap_matrix; bit-exact roundtrip."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"corrupt gap-matrix container {path}: bad header ({exc})") from exc
    if header.get("magic") != CONTAINER_MAGIC:
        raise ValueError(f"corrupt gap-matrix container {path}: wrong magic")
    m = int(header["m"])
    if len(payload) != m * m * 16:
        raise ValueError(
            f"corrupt gap-matrix container {path}: expected {m * m * 16} payload bytes, "
            f"got {len(payload)}"
        )
    entries = np.frombuffer(payload, dtype="<c16").reshape(m, m).astype(complex)
    config = AnnulusConfig(
        rho=float(header["rho"]),
        kernel_truncation=int(header["kernel_truncation"]),
        collocation_points=m,
    )
    imp = ImpedancePair(complex(*header["eta"]), complex(*header["gamma"]))
    noise = None
    if header["delta"] is not None:
        noise = NoiseSpec(float(header["delta"]), int(header["seed"]))
    return GapMatrix(entries, config, imp, noise)


def export_gap_matrix_csv(a: GapMatrix, path: str) -> None:
    """Debug CSV: row i holds re/im pairs of the i-th matrix row."""
    with open(path, "w") as fh:
        header = []
        for j in range(a.m):
            header.append(f"re_{j}")
            header.append(f"im_{j}")
        fh.write(",".join(header) + "\n")
        for i in range(a.m):
            cells = []
            for j in range(a.m):
                cells.append(f"{a.entries[i, j].real:.17g}")
                cells.append(f"{a.entries[i, j].imag:.17g}")
            fh.write(",".join(cells) + "\n")
