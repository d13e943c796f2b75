"""Recovery of the impedance coefficients from Cauchy data on the outer circle.

The measured pair (f, g) on r = 1 determines the annulus series coefficients
exactly (data completion), which gives the potential trace, its normal
derivative, and its tangential derivative on the inclusion boundary. Pairing
the boundary condition with conj(u) and integrating turns the unknown
coefficients into a linear system

    -int conj(u) dnu_u ds = eta * int |du/ds|^2 ds + gamma * int |u|^2 ds

(one equation per measurement for constant coefficients; expanding eta and
gamma in basis functions gives the rectangular variant). All boundary
integrals use the left-endpoint rule with ds = rho dtheta, which is exact for
the band-limited integrands produced by the series.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

from .forward import (
    AnnulusConfig,
    HarmonicCoefficients,
    ImpedancePair,
    trace_current_defective,
)
from .fourier import FourierCoefficients, PeriodicGridFunction, grid_angles

DEFAULT_QUADRATURE_POINTS = 256
ILL_CONDITIONED = 1e12


@dataclass(frozen=True)
class CauchyPair:
    """Voltage f and outward current g = d/dr u on the outer circle."""

    f: FourierCoefficients
    g: FourierCoefficients

    def __post_init__(self):
        if self.f.order != self.g.order:
            raise ValueError(
                f"voltage and current truncations differ: {self.f.order} vs {self.g.order}"
            )


@dataclass(frozen=True)
class BasisSet:
    """Expansion functions on the inclusion boundary, psi1 for eta and psi2
    for gamma; each callable takes an angle and returns a scalar. Linear
    independence on the quadrature grid is checked at assembly time."""

    psi1: Tuple[Callable, ...]
    psi2: Tuple[Callable, ...]

    def __post_init__(self):
        if not self.psi1 or not self.psi2:
            raise ValueError("both basis lists must be nonempty")
        object.__setattr__(self, "psi1", tuple(self.psi1))
        object.__setattr__(self, "psi2", tuple(self.psi2))


def constant_basis() -> BasisSet:
    """The one-function basis recovering constant (eta, gamma)."""
    return BasisSet((lambda theta: 1.0,), (lambda theta: 1.0,))


def complete_data(c: CauchyPair, order: int = 10) -> HarmonicCoefficients:
    """Series coefficients from outer-circle Cauchy data:
    a_n = (|n| f_n + g_n) / (2|n|), b_n = (|n| f_n - g_n) / (2|n|),
    a_0 = f_0, b_0 = g_0."""
    if order > c.f.order:
        raise ValueError(f"completion order {order} exceeds the data truncation {c.f.order}")
    if order < 0:
        raise ValueError(f"completion order must be nonnegative, got {order}")
    a = {0: c.f[0]}
    b = {0: c.g[0]}
    for n in range(-order, order + 1):
        if n == 0:
            continue
        k = abs(n)
        a[n] = (k * c.f[n] + c.g[n]) / (2.0 * k)
        b[n] = (k * c.f[n] - c.g[n]) / (2.0 * k)
    return HarmonicCoefficients(a, b)


def trace_on_gamma0(
    h: HarmonicCoefficients, rho: float, m: int
) -> Tuple[PeriodicGridFunction, PeriodicGridFunction, PeriodicGridFunction]:
    """Trace, normal derivative, and tangential derivative on r = rho.

    The normal points toward the origin (outward for the annulus), so
    dnu_u = -d/dr u; du/ds is computed mode-wise as (i n / rho) u_n(rho),
    never by finite differences.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"inclusion radius must lie in (0, 1), got {rho}")
    th = grid_angles(m)
    u = np.zeros(m, dtype=complex)
    dnu = np.zeros(m, dtype=complex)
    dsu = np.zeros(m, dtype=complex)
    for n in h.a:
        if n == 0:
            un = h.a[0] + h.b[0] * np.log(rho)
            dr = h.b[0] / rho
            ds = 0.0
        else:
            k = abs(n)
            un = h.a[n] * rho**k + h.b[n] * rho ** (-k)
            dr = k * (h.a[n] * rho ** (k - 1) - h.b[n] * rho ** (-k - 1))
            ds = 1j * n * un / rho
        phase = np.exp(1j * n * th)
        u += un * phase
        dnu += -dr * phase
        dsu += ds * phase
    return PeriodicGridFunction(u), PeriodicGridFunction(dnu), PeriodicGridFunction(dsu)


def assemble_impedance_system(
    pairs: Sequence[CauchyPair],
    rho: float,
    basis: BasisSet,
    m: int = DEFAULT_QUADRATURE_POINTS,
) -> Tuple[np.ndarray, np.ndarray]:
    """One row per Cauchy pair: the eta block holds int psi |du/ds|^2 ds, the
    gamma block int psi |u|^2 ds, and the right-hand side -int conj(u) dnu_u ds."""
    if not pairs:
        raise ValueError("need at least one Cauchy pair")
    th = grid_angles(m)
    weight = rho * 2.0 * np.pi / m
    p1 = np.array([[psi(t) for t in th] for psi in basis.psi1], dtype=complex)
    p2 = np.array([[psi(t) for t in th] for psi in basis.psi2], dtype=complex)
    for name, block in (("psi1", p1), ("psi2", p2)):
        gram = block @ block.conj().T * (2.0 * np.pi / m)
        if np.linalg.cond(gram) > ILL_CONDITIONED:
            raise ValueError(f"{name} basis functions are numerically dependent on the grid")

    rows = []
    rhs = []
    for pair in pairs:
        h = complete_data(pair, order=pair.f.order)
        u, dnu, dsu = trace_on_gamma0(h, rho, m)
        row = np.concatenate(
            [
                p1 @ (np.abs(dsu.values) ** 2) * weight,
                p2 @ (np.abs(u.values) ** 2) * weight,
            ]
        )
        lhs = -np.sum(np.conj(u.values) * dnu.values) * weight
        if np.linalg.norm(row) == 0 and lhs == 0:
            warnings.warn("skipping a Cauchy pair with zero trace on the inclusion boundary")
            continue
        rows.append(row)
        rhs.append(lhs)
    if not rows:
        raise ValueError("every Cauchy pair had zero trace; nothing to assemble")
    matrix = np.asarray(rows)
    vec = np.asarray(rhs)
    if min(matrix.shape) > 1 and np.linalg.cond(matrix) > ILL_CONDITIONED:
        warnings.warn(
            f"impedance system is ill-posed (condition number {np.linalg.cond(matrix):.3e})"
        )
    return matrix, vec


def recover_constants(
    pairs: Sequence[CauchyPair], rho: float, m: int = DEFAULT_QUADRATURE_POINTS
) -> Tuple[complex, complex]:
    """Solve for constant (eta, gamma); exact two-pair systems are solved
    directly, more pairs in least squares."""
    if len(pairs) < 2:
        raise ValueError(f"need at least two Cauchy pairs, got {len(pairs)}")
    matrix, rhs = assemble_impedance_system(pairs, rho, constant_basis(), m)
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > ILL_CONDITIONED:
        raise ValueError(
            f"impedance system is singular or ill-conditioned (condition number {cond:.3e})"
        )
    if matrix.shape[0] == 2:
        sol = np.linalg.solve(matrix, rhs)
    else:
        sol, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
    return complex(sol[0]), complex(sol[1])


def recover_varying(
    pairs: Sequence[CauchyPair],
    rho: float,
    basis: BasisSet,
    m: int = DEFAULT_QUADRATURE_POINTS,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Least-squares basis coefficients of varying (eta, gamma), plus the
    residual norm ||matrix x - rhs||_2 of the returned solution."""
    n1 = len(basis.psi1)
    n2 = len(basis.psi2)
    if len(pairs) < n1 + n2:
        raise ValueError(f"need at least {n1 + n2} Cauchy pairs, got {len(pairs)}")
    matrix, rhs = assemble_impedance_system(pairs, rho, basis, m)
    sol, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
    residual = float(np.linalg.norm(matrix @ sol - rhs))
    return sol[:n1], sol[n1:], residual


def add_current_noise(g: FourierCoefficients, delta: float, p: int) -> FourierCoefficients:
    """Deterministic measurement error g + delta e^{ip theta}: the mode-p
    coefficient grows by delta, everything else is untouched."""
    if p < 1:
        raise ValueError(f"noise mode must be a positive integer, got {p}")
    if p > g.order:
        raise ValueError(f"noise mode {p} outside the data truncation {g.order}")
    coeffs = dict(g.coeffs)
    coeffs[p] = coeffs[p] + delta
    return FourierCoefficients(coeffs)


def synthesize_cauchy_pair(
    f: FourierCoefficients, config: AnnulusConfig, imp: ImpedancePair
) -> CauchyPair:
    """Forward-model Cauchy data on the outer circle for the voltage f."""
    return CauchyPair(f, trace_current_defective(f, config, imp))


def write_cauchy_csv(pair: CauchyPair, path: str) -> None:
    """Cauchy pair as CSV with columns n, re_f, im_f, re_g, im_g."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "re_f", "im_f", "re_g", "im_g"])
        for n in sorted(pair.f.coeffs):
            writer.writerow(
                [
                    n,
                    f"{pair.f[n].real:.17g}",
                    f"{pair.f[n].imag:.17g}",
                    f"{pair.g[n].real:.17g}",
                    f"{pair.g[n].imag:.17g}",
                ]
            )


def read_cauchy_csv(path: str) -> CauchyPair:
    """Read a Cauchy pair written by write_cauchy_csv."""
    f = {}
    g = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["n", "re_f", "im_f", "re_g", "im_g"]:
            raise ValueError(f"unexpected Cauchy CSV header in {path}: {header}")
        for line in reader:
            if not line:
                continue
            n = int(line[0])
            f[n] = complex(float(line[1]), float(line[2]))
            g[n] = complex(float(line[3]), float(line[4]))
    return CauchyPair(FourierCoefficients(f), FourierCoefficients(g))
