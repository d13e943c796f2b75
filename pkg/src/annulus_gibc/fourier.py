"""Discrete 2*pi-periodic boundary functions and truncated Fourier series.

Every boundary quantity in this package (applied voltages, measured currents,
traces on the inclusion boundary) lives on the equispaced left-endpoint grid
theta_j = 2*pi*j/M. All quadrature uses the same left-endpoint rule, so sums
of band-limited integrands are exact whenever M exceeds the bandwidth.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np


def grid_angles(m: int) -> np.ndarray:
    """Collocation angles theta_j = 2*pi*j/m for j = 0..m-1."""
    if m < 4:
        raise ValueError(f"need at least 4 grid points, got {m}")
    return 2.0 * np.pi * np.arange(m) / m


@dataclass(frozen=True)
class PeriodicGridFunction:
    """Complex samples of a 2*pi-periodic function at theta_j = 2*pi*j/M."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size < 4:
            raise ValueError(
                f"need a 1-D array with at least 4 samples, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid samples must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return self.values.size

    def angles(self) -> np.ndarray:
        return grid_angles(self.m)


@dataclass(frozen=True)
class FourierCoefficients:
    """Truncated Fourier coefficients c_n covering every integer |n| <= order."""

    coeffs: Dict[int, complex]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("empty coefficient map")
        order = max(abs(n) for n in self.coeffs)
        if set(self.coeffs) != set(range(-order, order + 1)):
            raise ValueError(f"coefficients must cover every index with |n| <= {order}")
        clean = {}
        for n in sorted(self.coeffs):
            c = complex(self.coeffs[n])
            if not np.isfinite(c):
                raise ValueError(f"coefficient at n={n} is not finite")
            clean[n] = c
        object.__setattr__(self, "coeffs", clean)

    @property
    def order(self) -> int:
        return max(abs(n) for n in self.coeffs)

    def __getitem__(self, n: int) -> complex:
        return self.coeffs[n]


def single_mode(n: int, value: complex = 1.0, order: int = None) -> FourierCoefficients:
    """Coefficient set with a single nonzero entry at index n."""
    if order is None:
        order = abs(n)
    if abs(n) > order:
        raise ValueError(f"mode {n} does not fit inside order {order}")
    coeffs = {k: 0.0 + 0.0j for k in range(-order, order + 1)}
    coeffs[n] = complex(value)
    return FourierCoefficients(coeffs)


def analyze(f: PeriodicGridFunction, order: int) -> FourierCoefficients:
    """Left-endpoint Fourier analysis, c_n = (1/M) sum_j f(theta_j) e^{-i n theta_j}.

    Exact for band-limited inputs of order <= `order` when M > 2*order.
    """
    m = f.m
    if order > m // 2 - 1:
        raise ValueError(f"order {order} too large for {m} samples; need order <= M/2 - 1")
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    spectrum = np.fft.fft(f.values) / m
    return FourierCoefficients({n: complex(spectrum[n % m]) for n in range(-order, order + 1)})


def synthesize(c: FourierCoefficients, angles) -> np.ndarray:
    """Evaluate sum_{|n| <= order} c_n e^{i n theta} at the given angles."""
    theta = np.asarray(angles, dtype=float)
    out = np.zeros(theta.shape, dtype=complex)
    for n, cn in c.coeffs.items():
        if cn != 0:
            out += cn * np.exp(1j * n * theta)
    return out


def boundary_l2_norm(f: PeriodicGridFunction, radius: float) -> float:
    """Discrete L2 norm on a circle of the given radius, ds = radius * dtheta."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return float(np.sqrt(radius * (2.0 * np.pi / f.m) * np.sum(np.abs(f.values) ** 2)))
