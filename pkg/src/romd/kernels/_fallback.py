"""Pure-numpy implementations of the hot grid kernels.

Array layout: batches of fields have shape (k, nz, ny, nx); single fields
(nz, ny, nx).  These functions are the reference semantics for the compiled
extension and are selected automatically when it is unavailable.
"""
import numpy as np

BACKEND = "numpy"

# Fourth-order central coefficients for d^2/dx^2, offsets -2..+2, unscaled by h^2.
STENCIL = ((-2, -1.0 / 12.0), (-1, 4.0 / 3.0), (0, -5.0 / 2.0), (1, 4.0 / 3.0), (2, -1.0 / 12.0))


def laplacian_batch(fields, spacings):
    """Apply the periodic 13-point fourth-order Laplacian to a field batch.

    fields: (k, nz, ny, nx); spacings: (hx, hy, hz).  Returns a new array.
    """
    hx, hy, hz = spacings
    out = np.zeros_like(fields)
    for axis, h in ((1, hz), (2, hy), (3, hx)):
        acc = np.zeros_like(fields)
        for off, c in STENCIL:
            acc += c * np.roll(fields, -off, axis=axis)
        out += acc / (h * h)
    return out


def _axis_displacements(grid_shape, spacings, origin, lengths, center):
    """Per-axis minimum-image displacements (coordinate - center)."""
    out = []
    for axis in range(3):
        n = grid_shape[axis]
        h = spacings[axis]
        L = lengths[axis]
        d = origin[axis] + h * np.arange(n) - center[axis]
        d -= L * np.round(d / L)
        out.append(d)
    return out  # [dx (nx,), dy (ny,), dz (nz,)]


def gaussian_poly_field(grid_shape, spacings, origin, lengths, centers, amps, p0, p1, inv_w2):
    """Sum over centers of amp*(p0 + p1*d^2)*exp(-d^2*inv_w2), minimum image.

    grid_shape: (nx, ny, nz).  Returns a (nz, ny, nx) array.
    """
    nx, ny, nz = grid_shape
    out = np.zeros((nz, ny, nx))
    for i in range(len(centers)):
        dx, dy, dz = _axis_displacements(grid_shape, spacings, origin, lengths, centers[i])
        d2 = (
            dz[:, None, None] ** 2
            + dy[None, :, None] ** 2
            + dx[None, None, :] ** 2
        )
        out += amps[i] * (p0[i] + p1[i] * d2) * np.exp(-d2 * inv_w2[i])
    return out


def gaussian_poly_moments(field, grid_shape, spacings, origin, lengths, centers, p0, p1, inv_w2):
    """Per-center first moments sum_r field(r)*(r - R)_min*(p0 + p1 d^2)*exp(-d^2 inv_w2).

    field: (nz, ny, nx).  Returns an (n_centers, 3) array in (x, y, z) order.
    """
    n = len(centers)
    out = np.zeros((n, 3))
    for i in range(n):
        dx, dy, dz = _axis_displacements(grid_shape, spacings, origin, lengths, centers[i])
        d2 = (
            dz[:, None, None] ** 2
            + dy[None, :, None] ** 2
            + dx[None, None, :] ** 2
        )
        w = field * (p0[i] + p1[i] * d2) * np.exp(-d2 * inv_w2[i])
        out[i, 0] = np.sum(w * dx[None, None, :])
        out[i, 1] = np.sum(w * dy[None, :, None])
        out[i, 2] = np.sum(w * dz[:, None, None])
    return out
