"""Hot numerical loops with optional numba acceleration.

Every kernel here has a pure-numpy implementation. When numba is importable
and the environment variable ANNULUS_GIBC_NO_NUMBA is not set to "1", the
loop-shaped kernels are jit-compiled; otherwise the numpy path is used. Both
paths compute the same quantities in the same accumulation order and are
timed against each other in benchmarks/bench_kernels.py.
"""
import os

import numpy as np

if os.environ.get("ANNULUS_GIBC_NO_NUMBA", "") == "1":
    HAS_NUMBA = False
else:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"

# Morozov flag codes shared by the batch kernel and its callers.
MOROZOV_OK = 0
MOROZOV_UNREACHABLE = 1  # residual at the smallest alpha already exceeds the target
MOROZOV_TARGET_TOO_LARGE = 2  # target above the residual at the largest alpha
MOROZOV_NOISELESS = 3  # set by callers that skip the search entirely


# -- gap-matrix assembly ------------------------------------------------------

def _gap_matrix_impl(angles, sigma0, weights, scale):
    m = angles.size
    nmax = weights.size
    base = sigma0 / (2.0 * np.pi)
    out = np.empty((m, m), dtype=np.complex128)
    for i in range(m):
        for j in range(m):
            d = angles[i] - angles[j]
            acc = base
            for n in range(1, nmax + 1):
                acc = acc + (2.0 / np.pi) * weights[n - 1] * np.cos(n * d)
            out[i, j] = acc * scale
    return out


def _gap_matrix_numpy(angles, sigma0, weights, scale):
    diff = angles[:, None] - angles[None, :]
    out = np.full(diff.shape, sigma0 / (2.0 * np.pi), dtype=np.complex128)
    for n in range(1, weights.size + 1):
        out = out + (2.0 / np.pi) * weights[n - 1] * np.cos(n * diff)
    return out * scale


# -- batched Morozov bisection ------------------------------------------------
#
# Works in the eigenbasis of the Hermitian matrix H: with H = U diag(d) U^H and
# beta = U^H b, the Tikhonov residual is
#     ||H f_alpha - b||^2 = sum_k (alpha / (d_k^2 + alpha))^2 |beta_k|^2,
# a smooth increasing function of alpha, so bisection in log(alpha) converges.

def _morozov_batch_impl(d2, bmag2, targets, alpha_lo, alpha_hi, rtol, maxit):
    npts = targets.size
    nmodes = d2.size
    alphas = np.empty(npts)
    flags = np.zeros(npts, dtype=np.int8)
    for p in range(npts):
        target = targets[p]
        r_lo = 0.0
        r_hi = 0.0
        for k in range(nmodes):
            w = alpha_lo / (d2[k] + alpha_lo)
            r_lo += w * w * bmag2[p, k]
            w = alpha_hi / (d2[k] + alpha_hi)
            r_hi += w * w * bmag2[p, k]
        r_lo = np.sqrt(r_lo)
        r_hi = np.sqrt(r_hi)
        if target <= 0.0 or r_lo > target:
            alphas[p] = alpha_lo
            flags[p] = MOROZOV_UNREACHABLE
            continue
        if r_hi < target:
            alphas[p] = alpha_hi
            flags[p] = MOROZOV_TARGET_TOO_LARGE
            continue
        lo = alpha_lo
        hi = alpha_hi
        alpha = np.sqrt(lo * hi)
        for _ in range(maxit):
            res = 0.0
            for k in range(nmodes):
                w = alpha / (d2[k] + alpha)
                res += w * w * bmag2[p, k]
            res = np.sqrt(res)
            if abs(res - target) <= rtol * target:
                break
            if res > target:
                hi = alpha
            else:
                lo = alpha
            alpha = np.sqrt(lo * hi)
        alphas[p] = alpha
    return alphas, flags


def _morozov_batch_numpy(d2, bmag2, targets, alpha_lo, alpha_hi, rtol, maxit):
    npts = targets.size
    targets = np.asarray(targets, dtype=float)

    def residuals(alpha):
        w = alpha[:, None] / (d2[None, :] + alpha[:, None])
        return np.sqrt(np.sum(w * w * bmag2, axis=1))

    r_lo = residuals(np.full(npts, alpha_lo))
    r_hi = residuals(np.full(npts, alpha_hi))
    flags = np.zeros(npts, dtype=np.int8)
    flags[(targets <= 0.0) | (r_lo > targets)] = MOROZOV_UNREACHABLE
    flags[(flags == 0) & (r_hi < targets)] = MOROZOV_TARGET_TOO_LARGE

    alphas = np.where(flags == MOROZOV_UNREACHABLE, alpha_lo, alpha_hi)
    active = flags == MOROZOV_OK
    lo = np.full(npts, alpha_lo)
    hi = np.full(npts, alpha_hi)
    alpha = np.sqrt(lo * hi)
    for _ in range(maxit):
        if not np.any(active):
            break
        res = residuals(alpha)
        done = active & (np.abs(res - targets) <= rtol * targets)
        alphas[done] = alpha[done]
        active = active & ~done
        high = active & (res > targets)
        low = active & ~high
        hi[high] = alpha[high]
        lo[low] = alpha[low]
        alpha = np.where(active, np.sqrt(lo * hi), alpha)
    alphas[active] = alpha[active]
    return alphas, flags


# -- marching-squares cell scan -----------------------------------------------
#
# Scans a lattice of values (NaN marks nodes outside the sampling region) and
# emits one line segment per threshold crossing, together with integer ids of
# the two cell edges each segment ends on. Edge ids are (orientation, iy, ix)
# with orientation 0 for horizontal edges and 1 for vertical ones, so the two
# cells sharing an edge produce identical ids and segments can be chained into
# polylines by the caller. Saddle cells are disambiguated by the cell-center
# average.

def _marching_cells_impl(vals, xs, ys, thr):
    ny, nx = vals.shape
    max_segs = 2 * (ny - 1) * (nx - 1)
    segs = np.empty((max_segs, 4))
    keys = np.empty((max_segs, 6), dtype=np.int64)
    count = 0
    for iy in range(ny - 1):
        for ix in range(nx - 1):
            v0 = vals[iy, ix]
            v1 = vals[iy, ix + 1]
            v2 = vals[iy + 1, ix + 1]
            v3 = vals[iy + 1, ix]
            if not (np.isfinite(v0) and np.isfinite(v1) and np.isfinite(v2) and np.isfinite(v3)):
                continue
            case = 0
            if v0 > thr:
                case += 1
            if v1 > thr:
                case += 2
            if v2 > thr:
                case += 4
            if v3 > thr:
                case += 8
            if case == 0 or case == 15:
                continue
            s1a = -1
            s1b = -1
            s2a = -1
            s2b = -1
            if case == 1 or case == 14:
                s1a, s1b = 3, 0
            elif case == 2 or case == 13:
                s1a, s1b = 0, 1
            elif case == 3 or case == 12:
                s1a, s1b = 3, 1
            elif case == 4 or case == 11:
                s1a, s1b = 1, 2
            elif case == 6 or case == 9:
                s1a, s1b = 0, 2
            elif case == 7 or case == 8:
                s1a, s1b = 3, 2
            elif case == 5:
                if 0.25 * (v0 + v1 + v2 + v3) > thr:
                    s1a, s1b, s2a, s2b = 0, 1, 3, 2
                else:
                    s1a, s1b, s2a, s2b = 3, 0, 1, 2
            else:  # case == 10
                if 0.25 * (v0 + v1 + v2 + v3) > thr:
                    s1a, s1b, s2a, s2b = 3, 0, 1, 2
                else:
                    s1a, s1b, s2a, s2b = 0, 1, 2, 3
            for pair in range(2):
                ea = s1a if pair == 0 else s2a
                eb = s1b if pair == 0 else s2b
                if ea < 0:
                    continue
                # endpoint on edge ea
                xa, ya, ka0, ka1, ka2 = _edge_point(ea, ix, iy, v0, v1, v2, v3, xs, ys, thr)
                xb, yb, kb0, kb1, kb2 = _edge_point(eb, ix, iy, v0, v1, v2, v3, xs, ys, thr)
                segs[count, 0] = xa
                segs[count, 1] = ya
                segs[count, 2] = xb
                segs[count, 3] = yb
                keys[count, 0] = ka0
                keys[count, 1] = ka1
                keys[count, 2] = ka2
                keys[count, 3] = kb0
                keys[count, 4] = kb1
                keys[count, 5] = kb2
                count += 1
    return segs[:count], keys[:count]


def _edge_point_impl(edge, ix, iy, v0, v1, v2, v3, xs, ys, thr):
    # edges: 0 bottom (v0-v1), 1 right (v1-v2), 2 top (v3-v2), 3 left (v0-v3)
    if edge == 0:
        s = (thr - v0) / (v1 - v0)
        return xs[ix] + s * (xs[ix + 1] - xs[ix]), ys[iy], 0, iy, ix
    if edge == 1:
        s = (thr - v1) / (v2 - v1)
        return xs[ix + 1], ys[iy] + s * (ys[iy + 1] - ys[iy]), 1, iy, ix + 1
    if edge == 2:
        s = (thr - v3) / (v2 - v3)
        return xs[ix] + s * (xs[ix + 1] - xs[ix]), ys[iy + 1], 0, iy + 1, ix
    s = (thr - v0) / (v3 - v0)
    return xs[ix], ys[iy] + s * (ys[iy + 1] - ys[iy]), 1, iy, ix


if HAS_NUMBA:
    _edge_point = njit(cache=True)(_edge_point_impl)
    gap_matrix_entries = njit(cache=True)(_gap_matrix_impl)
    morozov_batch = njit(cache=True)(_morozov_batch_impl)
    marching_cells = njit(cache=True)(_marching_cells_impl)
else:
    _edge_point = _edge_point_impl
    gap_matrix_entries = _gap_matrix_numpy
    morozov_batch = _morozov_batch_numpy
    marching_cells = _marching_cells_impl
