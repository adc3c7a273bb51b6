"""Uniform periodic 3D grid and scalar fields living on it.

Fields are stored as flat float64 arrays of length M = nx*ny*nz in a fixed
linearization order: x fastest, then y, then z.  The equivalent 3D view has
shape (nz, ny, nx) in C order; all grid kernels use that layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid3:
    """Uniform periodic grid over an orthorhombic box.

    The box is centered at the origin by default: coordinates along x are
    origin_x + i*h_x for i in 0..nx-1 with origin_x = -Lx/2, and the same
    per axis.  Spacings are h = L/n (periodic wrap, no duplicated endpoint).
    """

    shape: tuple[int, int, int]          # (nx, ny, nz)
    lengths: tuple[float, float, float]  # (Lx, Ly, Lz) in Bohr
    origin: tuple[float, float, float] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        nx, ny, nz = self.shape
        if min(nx, ny, nz) < 8:
            raise ValueError(f"grid needs >= 8 points per axis, got {self.shape}")
        if min(self.lengths) <= 0:
            raise ValueError(f"box lengths must be positive, got {self.lengths}")
        if self.origin is None:
            object.__setattr__(
                self, "origin", tuple(-L / 2.0 for L in self.lengths)
            )

    @property
    def n(self) -> tuple[int, int, int]:
        return self.shape

    @property
    def spacings(self) -> tuple[float, float, float]:
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    @property
    def size(self) -> int:
        nx, ny, nz = self.shape
        return nx * ny * nz

    @property
    def cell_volume(self) -> float:
        hx, hy, hz = self.spacings
        return hx * hy * hz

    @property
    def shape_zyx(self) -> tuple[int, int, int]:
        nx, ny, nz = self.shape
        return (nz, ny, nx)

    def axis_coords(self, axis: int) -> np.ndarray:
        """Grid coordinates along axis (0=x, 1=y, 2=z)."""
        n = self.shape[axis]
        h = self.spacings[axis]
        return self.origin[axis] + h * np.arange(n)

    def coordinate_arrays(self):
        """Broadcastable (z, y, x) coordinate arrays for the 3D view."""
        x = self.axis_coords(0).reshape(1, 1, -1)
        y = self.axis_coords(1).reshape(1, -1, 1)
        z = self.axis_coords(2).reshape(-1, 1, 1)
        return z, y, x

    def as_3d(self, values: np.ndarray) -> np.ndarray:
        """View a flat field (x fastest) as a (nz, ny, nx) array."""
        return values.reshape(self.shape_zyx)

    def flatten(self, values3d: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(values3d).reshape(-1)

    def minimum_image(self, delta: np.ndarray, axis: int) -> np.ndarray:
        L = self.lengths[axis]
        return delta - L * np.round(delta / L)


@dataclass
class ScalarField:
    """Real-valued field sampled on a Grid3, flat x-fastest layout."""

    grid: Grid3
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.values.size != self.grid.size:
            raise ValueError(
                f"field has {self.values.size} values, grid has {self.grid.size} points"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    def as_3d(self) -> np.ndarray:
        return self.grid.as_3d(self.values)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def zeros_like_grid(grid: Grid3) -> ScalarField:
    return ScalarField(grid, np.zeros(grid.size))


def integrate(f: ScalarField) -> float:
    """Quadrature of a periodic field: h^3 times the sum of values."""
    return f.grid.cell_volume * float(np.sum(f.values))


def inner_product(f: ScalarField, g: ScalarField) -> float:
    """L2 inner product with quadrature weight h^3."""
    if f.grid is not g.grid and f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return f.grid.cell_volume * float(np.dot(f.values, g.values))
