"""Series solution of the electrostatic problem on the unit disk with a
concentric circular inclusion.

Geometry and sign conventions, used consistently everywhere in the package:
the inclusion boundary is the circle r = rho, the measurement boundary is
r = 1, and the unit normal nu is outward with respect to the annulus
rho < r < 1. On the outer circle d/dnu = +d/dr; on the inclusion boundary
d/dnu = -d/dr, so the impedance condition there reads

    (-d/dr - (eta/rho^2) d^2/dtheta^2 + gamma) u(rho, theta) = 0.

Arc length on the inclusion boundary is ds = rho dtheta, hence
d/ds = (1/rho) d/dtheta; on the outer circle ds = dtheta.

The potential with Dirichlet data f(theta) = sum f_n e^{in theta} at r = 1 is

    u(r, theta) = a_0 + b_0 ln r + sum_{n != 0} (a_n r^|n| + b_n r^{-|n|}) e^{in theta},

and the mode ratios sigma_n = b_n / a_n are rational in (eta, gamma). The
healthy potential (no inclusion) keeps only the r^|n| terms.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .fourier import FourierCoefficients, PeriodicGridFunction, grid_angles, synthesize


@dataclass(frozen=True)
class ImpedancePair:
    """Impedance coefficients (eta, gamma) of the boundary condition.

    Well-posedness requires positive real parts; the sampling theory
    additionally wants strictly positive imaginary parts, which is not
    enforced here (nonabsorbing limits are useful in tests).
    """

    eta: complex
    gamma: complex

    def __post_init__(self):
        eta = complex(self.eta)
        gamma = complex(self.gamma)
        if not (eta.real > 0 and gamma.real > 0):
            raise ValueError(
                f"impedance coefficients need positive real parts, got eta={eta}, gamma={gamma}"
            )
        if eta.imag < 0 or gamma.imag < 0:
            raise ValueError(
                f"impedance coefficients need nonnegative imaginary parts, got eta={eta}, gamma={gamma}"
            )
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "gamma", gamma)


@dataclass(frozen=True)
class AnnulusConfig:
    """Inclusion radius plus the discretization sizes shared by the pipeline."""

    rho: float
    kernel_truncation: int = 20
    collocation_points: int = 64

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"inclusion radius must lie in (0, 1), got {self.rho}")
        if self.kernel_truncation < 1:
            raise ValueError(f"kernel truncation must be >= 1, got {self.kernel_truncation}")
        if self.collocation_points <= 2 * self.kernel_truncation:
            raise ValueError(
                f"need collocation_points > 2 * kernel_truncation, got "
                f"{self.collocation_points} <= 2 * {self.kernel_truncation}"
            )


@dataclass(frozen=True)
class HarmonicCoefficients:
    """Series coefficients (a_n, b_n); b_0 multiplies ln r."""

    a: Dict[int, complex]
    b: Dict[int, complex]

    def __post_init__(self):
        if set(self.a) != set(self.b):
            raise ValueError("a and b must cover the same index range")
        a = {}
        b = {}
        for n in sorted(self.a):
            an = complex(self.a[n])
            bn = complex(self.b[n])
            if not (np.isfinite(an) and np.isfinite(bn)):
                raise ValueError(f"coefficient at n={n} is not finite")
            a[n] = an
            b[n] = bn
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def order(self) -> int:
        return max(abs(n) for n in self.a)


def sigma_n(n: int, config: AnnulusConfig, imp: ImpedancePair) -> complex:
    """Mode ratio sigma_n = rho^{2|n|} (|n|rho - n^2 eta - gamma rho^2) / (|n|rho + n^2 eta + gamma rho^2)."""
    if n == 0:
        raise ValueError("sigma_n is defined for nonzero n; use sigma_0")
    k = abs(n)
    rho = config.rho
    den = k * rho + k * k * imp.eta + imp.gamma * rho * rho
    if den == 0:
        raise ValueError(
            f"singular impedance parameters: |n|rho + n^2 eta + gamma rho^2 = 0 at n={n}"
        )
    num = k * rho - k * k * imp.eta - imp.gamma * rho * rho
    return rho ** (2 * k) * num / den


def sigma_0(config: AnnulusConfig, imp: ImpedancePair) -> complex:
    """Zeroth mode ratio gamma rho / (gamma rho ln rho - 1)."""
    rho = config.rho
    den = imp.gamma * rho * cmath.log(rho) - 1.0
    if den == 0:
        raise ValueError("singular impedance parameters: gamma rho ln rho = 1")
    return imp.gamma * rho / den


def kernel_weight(n: int, config: AnnulusConfig, imp: ImpedancePair) -> complex:
    """Mode weight |n| sigma_n / (sigma_n + 1) of the current-gap kernel."""
    s = sigma_n(n, config, imp)
    if s == -1:
        raise ValueError(f"resonant impedance parameters: sigma_{n} = -1")
    return abs(n) * s / (s + 1.0)


def solve_defective(
    f: FourierCoefficients, config: AnnulusConfig, imp: ImpedancePair
) -> HarmonicCoefficients:
    """Series coefficients of the potential with an inclusion, for voltage f."""
    a = {}
    b = {}
    for n, fn in f.coeffs.items():
        if n == 0:
            a[0] = fn
            b[0] = -sigma_0(config, imp) * fn
        else:
            s = sigma_n(n, config, imp)
            if s == -1:
                raise ValueError(f"resonant impedance parameters: sigma_{n} = -1")
            a[n] = fn / (s + 1.0)
            b[n] = s * fn / (s + 1.0)
    return HarmonicCoefficients(a, b)


def trace_current_defective(
    f: FourierCoefficients, config: AnnulusConfig, imp: ImpedancePair
) -> FourierCoefficients:
    """Outer-circle current d/dr u(1, theta) of the defective potential."""
    out = {}
    for n, fn in f.coeffs.items():
        if n == 0:
            out[0] = -sigma_0(config, imp) * fn
        else:
            s = sigma_n(n, config, imp)
            if s == -1:
                raise ValueError(f"resonant impedance parameters: sigma_{n} = -1")
            out[n] = abs(n) * fn * (1.0 - s) / (s + 1.0)
    return FourierCoefficients(out)


def trace_current_healthy(f: FourierCoefficients) -> FourierCoefficients:
    """Outer-circle current of the healthy potential: n -> |n| f_n."""
    return FourierCoefficients({n: abs(n) * fn for n, fn in f.coeffs.items()})


def evaluate_potential(h: HarmonicCoefficients, r: float, theta) -> complex:
    """Evaluate the truncated series at radius r and angle(s) theta."""
    if r < 0 or r > 1:
        raise ValueError(f"radius outside the unit disk: {r}")
    singular = h.b[0] != 0 or any(h.b[n] != 0 for n in h.b if n != 0)
    if singular and r <= 0:
        raise ValueError("potential has r^{-|n|} or ln r terms; r must be positive")
    th = np.asarray(theta, dtype=float)
    out = np.full(th.shape, h.a[0], dtype=complex)
    if h.b[0] != 0:
        out = out + h.b[0] * np.log(r)
    for n in h.a:
        if n == 0:
            continue
        k = abs(n)
        cn = h.a[n] * r**k
        if h.b[n] != 0:
            cn = cn + h.b[n] * r ** (-k)
        if cn != 0:
            out = out + cn * np.exp(1j * n * th)
    if out.ndim == 0:
        return complex(out)
    return out


def gap_kernel(theta, phi, config: AnnulusConfig, imp: ImpedancePair):
    """Truncated kernel of the current-gap operator; depends only on theta - phi."""
    d = np.asarray(theta, dtype=float) - np.asarray(phi, dtype=float)
    out = np.full(np.shape(d), sigma_0(config, imp) / (2.0 * np.pi), dtype=complex)
    for n in range(1, config.kernel_truncation + 1):
        out = out + (2.0 / np.pi) * kernel_weight(n, config, imp) * np.cos(n * d)
    if out.ndim == 0:
        return complex(out)
    return out


def energy_identity_residual(
    f: FourierCoefficients, config: AnnulusConfig, imp: ImpedancePair
) -> Tuple[complex, complex]:
    """Both sides of the energy identity for the current gap.

    Left side: the discrete pairing sum_j f(theta_j) conj((gap current)(theta_j))
    * (2*pi/M), exact when M exceeds twice the bandwidth of f. Right side:
    closed-form mode sums for the healthy disk energy, the annulus energy, and
    the impedance boundary terms (validated against 2-D quadrature in tests):

        rhs = int_D |grad u_0|^2 - int_annulus |grad u|^2
              - conj(eta) * int |du/ds|^2 ds - conj(gamma) * int |u|^2 ds.
    """
    m = config.collocation_points
    angles = grid_angles(m)
    healthy = trace_current_healthy(f)
    defective = trace_current_defective(f, config, imp)
    gap = FourierCoefficients(
        {n: healthy[n] - defective[n] for n in f.coeffs}
    )
    fvals = synthesize(f, angles)
    gvals = synthesize(gap, angles)
    lhs = complex(np.sum(fvals * np.conj(gvals)) * (2.0 * np.pi / m))

    h = solve_defective(f, config, imp)
    rho = config.rho
    disk = 0.0
    annulus = -abs(h.b[0]) ** 2 * np.log(rho)
    tangential = 0.0
    trace_sq = abs(h.a[0] + h.b[0] * np.log(rho)) ** 2
    for n in f.coeffs:
        if n == 0:
            continue
        k = abs(n)
        disk += k * abs(f[n]) ** 2
        annulus += k * (
            abs(h.a[n]) ** 2 * (1.0 - rho ** (2 * k))
            + abs(h.b[n]) ** 2 * (rho ** (-2 * k) - 1.0)
        )
        un = h.a[n] * rho**k + h.b[n] * rho ** (-k)
        tangential += k * k * abs(un) ** 2
        trace_sq += abs(un) ** 2
    rhs = (
        2.0 * np.pi * disk
        - 2.0 * np.pi * annulus
        - np.conj(imp.eta) * (2.0 * np.pi / rho) * tangential
        - np.conj(imp.gamma) * 2.0 * np.pi * rho * trace_sq
    )
    return lhs, complex(rhs)


def fd_solve(
    f: PeriodicGridFunction,
    config: AnnulusConfig,
    imp: ImpedancePair,
    radial_points: int,
) -> Tuple[np.ndarray, PeriodicGridFunction]:
    """Independent second-order finite-difference solve on the annulus.

    Centered differences for the polar Laplacian on [rho, 1] x [0, 2*pi),
    a Dirichlet row at r = 1, and the impedance row at r = rho with a
    one-sided second-order radial derivative. Returns the solution grid
    (radial_points x M, radius increasing) and the one-sided second-order
    current d/dr u(1, theta). Test oracle; constant coefficients only.
    """
    if radial_points < 8:
        raise ValueError(f"need at least 8 radial points, got {radial_points}")
    nr = radial_points
    m = f.m
    rho = config.rho
    h = (1.0 - rho) / (nr - 1)
    r = rho + h * np.arange(nr)
    dth = 2.0 * np.pi / m

    rows = []
    cols = []
    data = []
    rhs = np.zeros(nr * m, dtype=complex)

    def add(i, j, i2, j2, value):
        rows.append(i * m + j)
        cols.append(i2 * m + (j2 % m))
        data.append(value)

    for j in range(m):
        # impedance row at r = rho
        add(0, j, 0, j, 1.5 / h + 2.0 * imp.eta / (rho * rho * dth * dth) + imp.gamma)
        add(0, j, 1, j, -2.0 / h)
        add(0, j, 2, j, 0.5 / h)
        add(0, j, 0, j + 1, -imp.eta / (rho * rho * dth * dth))
        add(0, j, 0, j - 1, -imp.eta / (rho * rho * dth * dth))
        # interior Laplacian rows
        for i in range(1, nr - 1):
            add(i, j, i + 1, j, 1.0 / (h * h) + 1.0 / (2.0 * h * r[i]))
            add(i, j, i - 1, j, 1.0 / (h * h) - 1.0 / (2.0 * h * r[i]))
            add(i, j, i, j, -2.0 / (h * h) - 2.0 / (r[i] * r[i] * dth * dth))
            add(i, j, i, j + 1, 1.0 / (r[i] * r[i] * dth * dth))
            add(i, j, i, j - 1, 1.0 / (r[i] * r[i] * dth * dth))
        # Dirichlet row at r = 1
        add(nr - 1, j, nr - 1, j, 1.0)
        rhs[(nr - 1) * m + j] = f.values[j]

    matrix = scipy.sparse.csc_matrix(
        (np.asarray(data, dtype=complex), (rows, cols)), shape=(nr * m, nr * m)
    )
    try:
        lu = scipy.sparse.linalg.splu(matrix)
    except RuntimeError as exc:
        raise RuntimeError(f"finite-difference oracle failed: {exc}") from exc
    u = lu.solve(rhs).reshape(nr, m)
    current = (3.0 * u[nr - 1] - 4.0 * u[nr - 2] + u[nr - 3]) / (2.0 * h)
    return u, PeriodicGridFunction(current)
