# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid kernels: periodic fourth-order stencil and ion lattice sums.

Semantics mirror kernels._fallback exactly (same signatures, same layout).
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, round

cnp.import_array()

BACKEND = "compiled"

cdef double C0 = -5.0 / 2.0
cdef double C1 = 4.0 / 3.0
cdef double C2 = -1.0 / 12.0


cdef inline Py_ssize_t wrap(Py_ssize_t i, Py_ssize_t n) noexcept:
    # offsets are at most +-2 and n >= 8, so one correction suffices
    if i < 0:
        return i + n
    if i >= n:
        return i - n
    return i


def laplacian_batch(cnp.ndarray[cnp.float64_t, ndim=4] fields, spacings):
    cdef double hx = spacings[0], hy = spacings[1], hz = spacings[2]
    cdef double wx = 1.0 / (hx * hx), wy = 1.0 / (hy * hy), wz = 1.0 / (hz * hz)
    cdef Py_ssize_t nb = fields.shape[0], nz = fields.shape[1], ny = fields.shape[2], nx = fields.shape[3]
    cdef cnp.ndarray[cnp.float64_t, ndim=4] out = np.empty_like(fields)
    cdef double[:, :, :, ::1] f = fields
    cdef double[:, :, :, ::1] o = out
    cdef Py_ssize_t b, iz, iy, ix
    cdef Py_ssize_t zm1, zm2, zp1, zp2, ym1, ym2, yp1, yp2, xm1, xm2, xp1, xp2
    cdef double center

    for b in range(nb):
        for iz in range(nz):
            zm1 = wrap(iz - 1, nz); zm2 = wrap(iz - 2, nz)
            zp1 = wrap(iz + 1, nz); zp2 = wrap(iz + 2, nz)
            for iy in range(ny):
                ym1 = wrap(iy - 1, ny); ym2 = wrap(iy - 2, ny)
                yp1 = wrap(iy + 1, ny); yp2 = wrap(iy + 2, ny)
                for ix in range(nx):
                    xm1 = wrap(ix - 1, nx); xm2 = wrap(ix - 2, nx)
                    xp1 = wrap(ix + 1, nx); xp2 = wrap(ix + 2, nx)
                    center = f[b, iz, iy, ix]
                    o[b, iz, iy, ix] = (
                        wx * (C0 * center
                              + C1 * (f[b, iz, iy, xm1] + f[b, iz, iy, xp1])
                              + C2 * (f[b, iz, iy, xm2] + f[b, iz, iy, xp2]))
                        + wy * (C0 * center
                                + C1 * (f[b, iz, ym1, ix] + f[b, iz, yp1, ix])
                                + C2 * (f[b, iz, ym2, ix] + f[b, iz, yp2, ix]))
                        + wz * (C0 * center
                                + C1 * (f[b, zm1, iy, ix] + f[b, zp1, iy, ix])
                                + C2 * (f[b, zm2, iy, ix] + f[b, zp2, iy, ix]))
                    )
    return out


cdef void _axis_disp(double* d, Py_ssize_t n, double h, double orig, double L, double c) noexcept:
    cdef Py_ssize_t i
    cdef double v
    for i in range(n):
        v = orig + h * i - c
        d[i] = v - L * round(v / L)


def gaussian_poly_field(grid_shape, spacings, origin, lengths, centers, amps, p0, p1, inv_w2):
    cdef Py_ssize_t nx = grid_shape[0], ny = grid_shape[1], nz = grid_shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.zeros((nz, ny, nx))
    cdef double[:, :, ::1] o = out
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cen = np.ascontiguousarray(centers, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(amps, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q0 = np.ascontiguousarray(p0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q1 = np.ascontiguousarray(p1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] iw = np.ascontiguousarray(inv_w2, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dx = np.empty(nx), dy = np.empty(ny), dz = np.empty(nz)
    cdef Py_ssize_t i, iz, iy, ix
    cdef double d2, dz2, dzy2

    for i in range(cen.shape[0]):
        _axis_disp(&dx[0], nx, spacings[0], origin[0], lengths[0], cen[i, 0])
        _axis_disp(&dy[0], ny, spacings[1], origin[1], lengths[1], cen[i, 1])
        _axis_disp(&dz[0], nz, spacings[2], origin[2], lengths[2], cen[i, 2])
        for iz in range(nz):
            dz2 = dz[iz] * dz[iz]
            for iy in range(ny):
                dzy2 = dz2 + dy[iy] * dy[iy]
                for ix in range(nx):
                    d2 = dzy2 + dx[ix] * dx[ix]
                    o[iz, iy, ix] += a[i] * (q0[i] + q1[i] * d2) * exp(-d2 * iw[i])
    return out


def gaussian_poly_moments(cnp.ndarray[cnp.float64_t, ndim=3] field,
                          grid_shape, spacings, origin, lengths, centers, p0, p1, inv_w2):
    cdef Py_ssize_t nx = grid_shape[0], ny = grid_shape[1], nz = grid_shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cen = np.ascontiguousarray(centers, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q0 = np.ascontiguousarray(p0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q1 = np.ascontiguousarray(p1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] iw = np.ascontiguousarray(inv_w2, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((cen.shape[0], 3))
    cdef double[:, :, ::1] g = field
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dx = np.empty(nx), dy = np.empty(ny), dz = np.empty(nz)
    cdef Py_ssize_t i, iz, iy, ix
    cdef double d2, dz2, dzy2, w, sx, sy, sz

    for i in range(cen.shape[0]):
        _axis_disp(&dx[0], nx, spacings[0], origin[0], lengths[0], cen[i, 0])
        _axis_disp(&dy[0], ny, spacings[1], origin[1], lengths[1], cen[i, 1])
        _axis_disp(&dz[0], nz, spacings[2], origin[2], lengths[2], cen[i, 2])
        sx = 0.0; sy = 0.0; sz = 0.0
        for iz in range(nz):
            dz2 = dz[iz] * dz[iz]
            for iy in range(ny):
                dzy2 = dz2 + dy[iy] * dy[iy]
                for ix in range(nx):
                    d2 = dzy2 + dx[ix] * dx[ix]
                    w = g[iz, iy, ix] * (q0[i] + q1[i] * d2) * exp(-d2 * iw[i])
                    sx += w * dx[ix]
                    sy += w * dy[iy]
                    sz += w * dz[iz]
        out[i, 0] = sx; out[i, 1] = sy; out[i, 2] = sz
    return out
