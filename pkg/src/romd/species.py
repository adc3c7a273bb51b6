"""Ion species parameters and atomic configurations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BOHR_ANGLE_WATER = 104.5  # reference H-O-H angle, degrees
BOND_WATER = 1.83         # reference O-H bond length, Bohr
HYDROGEN_MASS = 1837.15   # electron masses
OXYGEN_MASS = 29164.4


@dataclass(frozen=True)
class Species:
    """Soft local pseudopotential parameters for one ion species.

    The ionic potential felt by electrons is
        -Z*erf(d/r_c)/d + (c0 + c2*d^2)*exp(-d^2/r_w^2)
    where the first term is the (negated) potential of the compensating
    Gaussian charge of width r_c carrying charge -Z.
    """

    label: str
    Z: float
    r_c: float
    c0: float = 0.0
    c2: float = 0.0
    r_w: float = 1.0
    mass: float = HYDROGEN_MASS

    def __post_init__(self):
        if self.Z <= 0:
            raise ValueError(f"species {self.label}: Z must be positive")
        if self.r_c <= 0 or self.r_w <= 0:
            raise ValueError(f"species {self.label}: widths must be positive")
        if self.mass <= 0:
            raise ValueError(f"species {self.label}: mass must be positive")


# Defaults calibrated on a 32^3 grid over [-6,6]^3 so the relaxed molecule
# sits at L ~ 1.87 Bohr, theta ~ 101 deg (within 15% of 1.83 / 104.5).
OXYGEN = Species("O", Z=6.0, r_c=0.8, c0=-3.0, c2=-1.2, r_w=1.2, mass=OXYGEN_MASS)
HYDROGEN = Species("H", Z=1.0, r_c=0.75, c0=-0.35, c2=0.0, r_w=0.7, mass=HYDROGEN_MASS)

MIN_ION_SEPARATION = 0.1  # Bohr


@dataclass
class AtomicConfiguration:
    """Ion positions plus per-ion species and pinned flags."""

    positions: np.ndarray            # (n_ions, 3), Bohr
    species: tuple[Species, ...]
    pinned: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        if len(self.species) != len(self.positions):
            raise ValueError("one species entry required per ion")
        if self.pinned is None:
            self.pinned = np.zeros(len(self.positions), dtype=bool)
        else:
            self.pinned = np.asarray(self.pinned, dtype=bool).reshape(-1)
        if self.pinned.size != len(self.positions):
            raise ValueError("one pinned flag required per ion")

    @property
    def n_ions(self) -> int:
        return len(self.positions)

    @property
    def charges(self) -> np.ndarray:
        return np.array([s.Z for s in self.species])

    @property
    def masses(self) -> np.ndarray:
        return np.array([s.mass for s in self.species])

    def total_charge(self) -> float:
        return float(sum(s.Z for s in self.species))

    def with_positions(self, positions: np.ndarray) -> "AtomicConfiguration":
        return AtomicConfiguration(np.array(positions), self.species, self.pinned.copy())

    def validate_geometry(self, lengths) -> None:
        """Check positions fall in the box after wrapping and ions do not overlap."""
        L = np.asarray(lengths)
        wrapped = self.positions - L * np.round(self.positions / L)
        if np.any(np.abs(wrapped) > L / 2 + 1e-12):
            raise ValueError("ion positions do not wrap into the box")
        for i in range(self.n_ions):
            for j in range(i + 1, self.n_ions):
                d = minimum_image_distance(self.positions[i], self.positions[j], L)
                if d <= MIN_ION_SEPARATION:
                    raise ValueError(
                        f"ions {i} and {j} are {d:.3f} Bohr apart (< {MIN_ION_SEPARATION})"
                    )


def minimum_image_distance(a, b, lengths) -> float:
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    L = np.asarray(lengths)
    d -= L * np.round(d / L)
    return float(np.linalg.norm(d))


def water_configuration(
    L1: float,
    L2: float,
    theta_deg: float,
    o_species: Species = OXYGEN,
    h_species: Species = HYDROGEN,
) -> AtomicConfiguration:
    """Canonical-frame water: O pinned at the origin, bisector along +x.

    H1 sits in the first quadrant of the z=0 plane, H2 in the fourth.
    """
    th = np.radians(theta_deg)
    positions = np.array(
        [
            [0.0, 0.0, 0.0],
            [L1 * np.cos(th / 2), L1 * np.sin(th / 2), 0.0],
            [L2 * np.cos(th / 2), -L2 * np.sin(th / 2), 0.0],
        ]
    )
    return AtomicConfiguration(
        positions,
        (o_species, h_species, h_species),
        np.array([True, False, False]),
    )
