"""Sampling reconstruction of the inclusion from the current-gap matrix.

For every sampling point z the Poisson-kernel signature b_z is tested against
the range of Im(A)^{1/2}: the regularized solution of the square-root equation
stays bounded exactly when z lies inside the inclusion, so the reciprocal
solution norm is an indicator that is O(1) inside and collapses outside. Two
regularizations are implemented: spectral cutoff on the square root (W) and
Tikhonov with the Morozov discrepancy rule on Im(A) itself (P).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .fourier import grid_angles
from .gap_operator import NoiseSpec

ALPHA_BRACKET = (1e-16, 1e4)
MOROZOV_RTOL = 1e-3
MOROZOV_MAXIT = 200
DEFAULT_CUTOFF = 1e-8
MOROZOV_TAU = 1.2

_FLAG_NAMES = {
    _kernels.MOROZOV_OK: "",
    _kernels.MOROZOV_UNREACHABLE: "alpha_min",
    _kernels.MOROZOV_TARGET_TOO_LARGE: "alpha_max",
    _kernels.MOROZOV_NOISELESS: "noiseless",
}


@dataclass(frozen=True)
class SamplingGrid:
    """Sampling points inside the unit disk, kept a margin away from the
    measurement circle. Lattice metadata (shape, axes, inside mask) is present
    when the grid was built by make_lattice_grid and enables level-set
    extraction."""

    points: np.ndarray
    margin: float
    shape: Optional[Tuple[int, int]] = None
    xs: Optional[np.ndarray] = None
    ys: Optional[np.ndarray] = None
    inside: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be an array of 2-D points, got shape {pts.shape}")
        if self.margin <= 0:
            raise ValueError(f"margin must be positive, got {self.margin}")
        radii = np.hypot(pts[:, 0], pts[:, 1])
        limit = 1.0 - self.margin + 1e-9
        if pts.size and radii.max() > limit:
            raise ValueError(
                f"sampling points must satisfy |z| <= 1 - margin, worst radius {radii.max()}"
            )
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class IndicatorGrid:
    """Normalized indicator values over a sampling grid, with per-point flags."""

    grid: SamplingGrid
    values: np.ndarray
    kind: str
    flags: Tuple[str, ...]
    alphas: Optional[np.ndarray] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.points.shape[0],):
            raise ValueError("one indicator value per sampling point required")
        if not np.all(np.isfinite(vals)):
            raise ValueError("indicator values must be finite")
        if vals.size and (vals.min() < 0 or vals.max() > 1 + 1e-12):
            raise ValueError("indicator values must lie in [0, 1]")
        if vals.size and vals.max() > 0 and abs(vals.max() - 1.0) > 1e-12:
            raise ValueError("indicator values must be normalized to max 1")
        if self.kind not in ("W", "P"):
            raise ValueError(f"indicator kind must be 'W' or 'P', got {self.kind!r}")
        if len(self.flags) != vals.size:
            raise ValueError("one flag string per sampling point required")
        object.__setattr__(self, "values", vals)


def make_lattice_grid(resolution: int = 101, margin: float = 0.1) -> SamplingGrid:
    """Regular lattice on [-1, 1]^2 restricted to |z| <= 1 - margin."""
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    xs = np.linspace(-1.0, 1.0, resolution)
    ys = np.linspace(-1.0, 1.0, resolution)
    gx, gy = np.meshgrid(xs, ys)
    inside = np.hypot(gx, gy) <= 1.0 - margin + 1e-9
    points = np.column_stack([gx[inside], gy[inside]])
    return SamplingGrid(
        points, margin, shape=inside.shape, xs=xs, ys=ys, inside=inside
    )


def poisson_rhs(z, m: int) -> np.ndarray:
    """Poisson-kernel signature of the point z sampled on the collocation grid.

    z is either a complex number or an (x, y) pair.
    """
    if np.iscomplexobj(z) and np.ndim(z) == 0:
        z = np.array([np.real(z), np.imag(z)])
    z = np.asarray(z, dtype=float)
    r = float(np.hypot(z[0], z[1]))
    if r >= 1.0:
        raise ValueError(f"sampling point must lie inside the unit disk, got |z| = {r}")
    theta_z = float(np.arctan2(z[1], z[0]))
    th = grid_angles(m)
    vals = (1.0 - r * r) / (2.0 * np.pi * (r * r + 1.0 - 2.0 * r * np.cos(th - theta_z)))
    return vals.astype(complex)


def _poisson_rhs_batch(points: np.ndarray, m: int) -> np.ndarray:
    """Column-stacked Poisson signatures, shape (m, npoints)."""
    r = np.hypot(points[:, 0], points[:, 1])
    if r.size and r.max() >= 1.0:
        raise ValueError("sampling points must lie inside the unit disk")
    theta_z = np.arctan2(points[:, 1], points[:, 0])
    th = grid_angles(m)
    denom = r * r + 1.0 - 2.0 * r * np.cos(th[:, None] - theta_z[None, :])
    return ((1.0 - r * r) / (2.0 * np.pi * denom)).astype(complex)


def solve_cutoff(s: np.ndarray, b: np.ndarray, cutoff: float = DEFAULT_CUTOFF) -> np.ndarray:
    """Spectral-cutoff solve of S f = b, keeping eigenvalues above the cutoff."""
    if cutoff <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    w, v = np.linalg.eigh(s)
    keep = w > cutoff
    if not np.any(keep):
        warnings.warn("all spectral modes fall below the cutoff; returning the zero vector")
        return np.zeros(s.shape[0], dtype=complex)
    vk = v[:, keep]
    return vk @ ((vk.conj().T @ b) / w[keep])


def indicator_W(
    grid: SamplingGrid, s: np.ndarray, cutoff: float = DEFAULT_CUTOFF
) -> IndicatorGrid:
    """Spectral-cutoff indicator: W(z) = normalized 1 / ||f_z||_2 where
    S f_z = b_z is solved on the retained eigenspace of S = Im(A)^{1/2}."""
    if cutoff <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    npts = grid.points.shape[0]
    if npts == 0:
        raise ValueError("empty sampling grid")
    m = s.shape[0]
    w, v = np.linalg.eigh(s)
    keep = w > cutoff
    b = _poisson_rhs_batch(grid.points, m)
    if np.any(keep):
        beta = v[:, keep].conj().T @ b
        norms = np.sqrt(np.sum(np.abs(beta / w[keep][:, None]) ** 2, axis=0))
    else:
        norms = np.zeros(npts)
    w_reg = np.divide(1.0, norms, out=np.zeros(npts), where=norms > 0)
    flags = tuple("" if n > 0 else "degenerate" for n in norms)
    top = w_reg.max()
    values = w_reg / top if top > 0 else w_reg
    return IndicatorGrid(grid, values, "W", flags)


def tikhonov_solve(h: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    """Tikhonov normal-equations solve f = (H^H H + alpha I)^{-1} H^H b for Hermitian H."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    d, u = np.linalg.eigh(h)
    return u @ ((d / (d * d + alpha)) * (u.conj().T @ b))


def morozov_alpha(h: np.ndarray, b: np.ndarray, delta_abs: float) -> float:
    """Discrepancy-principle parameter: the alpha with ||H f_alpha - b|| equal
    to delta_abs (1e-3 relative), bisected in log alpha over the fixed bracket.

    Unreachable targets return the bracket bottom with a warning; targets above
    the residual at the largest alpha return the bracket top with a warning.
    """
    if delta_abs <= 0:
        raise ValueError(f"discrepancy target must be positive, got {delta_abs}")
    d, u = np.linalg.eigh(h)
    beta = u.conj().T @ b
    alphas, flags = _kernels.morozov_batch(
        d * d,
        np.abs(beta)[None, :] ** 2,
        np.array([float(delta_abs)]),
        ALPHA_BRACKET[0],
        ALPHA_BRACKET[1],
        MOROZOV_RTOL,
        MOROZOV_MAXIT,
    )
    if flags[0] == _kernels.MOROZOV_UNREACHABLE:
        warnings.warn("discrepancy target unreachable; returning the smallest bracket alpha")
    elif flags[0] == _kernels.MOROZOV_TARGET_TOO_LARGE:
        warnings.warn(
            "discrepancy target exceeds the residual at the largest alpha; "
            "returning the bracket top"
        )
    return float(alphas[0])


def indicator_P(
    grid: SamplingGrid,
    h: np.ndarray,
    s: np.ndarray,
    noise: NoiseSpec,
    tau: float = MOROZOV_TAU,
) -> IndicatorGrid:
    """Tikhonov-Morozov indicator: P(z) = normalized 1 / ||S f_z^alpha||_2 with
    f_z^alpha the Tikhonov solution of H f = b_z at the Morozov parameter for
    the target tau * delta * ||b_z||_2.

    Without noise the discrepancy target degenerates, so the smallest bracket
    alpha is used at every point and flagged 'noiseless'.
    """
    npts = grid.points.shape[0]
    if npts == 0:
        raise ValueError("empty sampling grid")
    m = h.shape[0]
    d, u = np.linalg.eigh(h)
    b = _poisson_rhs_batch(grid.points, m)
    beta = u.conj().T @ b
    if noise.delta > 0:
        targets = tau * noise.delta * np.linalg.norm(b, axis=0)
        alphas, mflags = _kernels.morozov_batch(
            d * d,
            (np.abs(beta) ** 2).T.copy(),
            targets,
            ALPHA_BRACKET[0],
            ALPHA_BRACKET[1],
            MOROZOV_RTOL,
            MOROZOV_MAXIT,
        )
    else:
        alphas = np.full(npts, ALPHA_BRACKET[0])
        mflags = np.full(npts, _kernels.MOROZOV_NOISELESS, dtype=np.int8)
    filt = d[:, None] / (d[:, None] ** 2 + alphas[None, :])
    f = u @ (filt * beta)
    norms = np.linalg.norm(s @ f, axis=0)
    p_reg = np.divide(1.0, norms, out=np.zeros(npts), where=norms > 0)
    flags = []
    for i in range(npts):
        parts = []
        name = _FLAG_NAMES[int(mflags[i])]
        if name:
            parts.append(name)
        if norms[i] == 0:
            parts.append("degenerate")
        flags.append("+".join(parts))
    top = p_reg.max()
    values = p_reg / top if top > 0 else p_reg
    return IndicatorGrid(grid, values, "P", tuple(flags), alphas=alphas)


def extract_level_set(ind: IndicatorGrid, threshold: float):
    """Marching-squares contour of the indicator at the threshold.

    Returns a list of polylines as (k, 2) arrays; a polyline whose ends meet is
    closed by repeating its first vertex. Cells touching lattice nodes outside
    the sampling region are skipped, so all vertices stay inside it.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie strictly between 0 and 1, got {threshold}")
    grid = ind.grid
    if grid.shape is None:
        raise ValueError("level-set extraction needs a lattice sampling grid")
    vals = np.full(grid.shape, np.nan)
    vals[grid.inside] = ind.values
    segs, keys = _kernels.marching_cells(vals, grid.xs, grid.ys, float(threshold))
    return _chain_segments(np.asarray(segs), np.asarray(keys))


def _chain_segments(segs: np.ndarray, keys: np.ndarray):
    count = segs.shape[0]
    adjacency = {}
    for i in range(count):
        for side in (0, 1):
            key = tuple(keys[i, 3 * side : 3 * side + 3])
            adjacency.setdefault(key, []).append((i, side))

    def endpoint(i, side):
        return segs[i, 2 * side : 2 * side + 2]

    def key_of(i, side):
        return tuple(keys[i, 3 * side : 3 * side + 3])

    used = np.zeros(count, dtype=bool)
    polylines = []
    for start in range(count):
        if used[start]:
            continue
        used[start] = True
        points = [endpoint(start, 0), endpoint(start, 1)]
        end_keys = [key_of(start, 0), key_of(start, 1)]
        # grow at the tail, then at the head
        for head in (False, True):
            while True:
                key = end_keys[0] if head else end_keys[1]
                hit = None
                for i, side in adjacency.get(key, ()):
                    if not used[i]:
                        hit = (i, side)
                        break
                if hit is None:
                    break
                i, side = hit
                used[i] = True
                far = 1 - side
                if head:
                    points.insert(0, endpoint(i, far))
                    end_keys[0] = key_of(i, far)
                else:
                    points.append(endpoint(i, far))
                    end_keys[1] = key_of(i, far)
        closed = end_keys[0] == end_keys[1] and len(points) > 2
        if closed:
            points.append(points[0])
        polylines.append(np.asarray(points))
    return polylines
