"""Rigid-body parametrization of the pinned water molecule and training-set
enumeration over the (s1, s2, s_theta) sampling grid."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CollinearGeometry, DomainWarning, InvalidPlan
from .species import BOND_WATER, BOHR_ANGLE_WATER, HYDROGEN, OXYGEN, AtomicConfiguration, Species, water_configuration

S_MIN, S_MAX = 0.95, 1.05
S_THETA_MIN, S_THETA_MAX = -5.0, 5.0


@dataclass(frozen=True)
class WaterParameters:
    """Dimensionless bond scalings and angle offset: L_i = 1.83*s_i,
    theta = 104.5 deg + s_theta."""

    s1: float
    s2: float
    s_theta: float

    def in_training_domain(self) -> bool:
        return (
            S_MIN - 1e-12 <= self.s2 <= self.s1 <= S_MAX + 1e-12
            and S_THETA_MIN - 1e-9 <= self.s_theta <= S_THETA_MAX + 1e-9
        )

    def warn_if_outside(self):
        if not self.in_training_domain():
            warnings.warn(
                f"parameters {self} outside the training domain", DomainWarning, stacklevel=2
            )

    @property
    def L1(self) -> float:
        return BOND_WATER * self.s1

    @property
    def L2(self) -> float:
        return BOND_WATER * self.s2

    @property
    def theta_deg(self) -> float:
        return BOHR_ANGLE_WATER + self.s_theta


@dataclass(frozen=True)
class SamplingPlan:
    """Numbers of sampling intervals for the bond scaling and the angle."""

    k_l: int
    k_theta: int

    def __post_init__(self):
        if self.k_l < 1 or self.k_theta < 1:
            raise InvalidPlan(f"interval counts must be >= 1, got {self}")

    @property
    def delta_l(self) -> float:
        return (S_MAX - S_MIN) / self.k_l

    @property
    def delta_theta(self) -> float:
        return (S_THETA_MAX - S_THETA_MIN) / self.k_theta

    @property
    def n_train(self) -> int:
        return (self.k_l + 1) * (self.k_l + 2) * (self.k_theta + 1) // 2


def enumerate_training_set(plan: SamplingPlan) -> list[WaterParameters]:
    """All (s1, s2, s_theta) with s2 <= s1 on the uniform grids, lexicographic.

    Count equals (K_L+1)(K_L+2)(K_theta+1)/2.
    """
    s_values = [S_MIN + i * plan.delta_l for i in range(plan.k_l + 1)]
    t_values = [S_THETA_MIN + j * plan.delta_theta for j in range(plan.k_theta + 1)]
    out = []
    for i1, s1 in enumerate(s_values):
        for s2 in s_values[: i1 + 1]:
            for st in t_values:
                out.append(WaterParameters(s1=s1, s2=s2, s_theta=st))
    assert len(out) == plan.n_train
    return out


def config_from_parameters(
    nu: WaterParameters,
    o_species: Species = OXYGEN,
    h_species: Species = HYDROGEN,
) -> AtomicConfiguration:
    """Canonical-frame configuration: O at the origin, bisector along +x,
    H1 in the first quadrant of the z=0 plane, H2 in the fourth."""
    return water_configuration(nu.L1, nu.L2, nu.theta_deg, o_species, h_species)


def parameters_from_positions(positions: np.ndarray) -> WaterParameters:
    """Invert config_from_parameters for canonical-frame positions."""
    from .md import bond_observables

    L1, L2, theta = bond_observables(positions)
    return WaterParameters(
        s1=L1 / BOND_WATER, s2=L2 / BOND_WATER, s_theta=theta - BOHR_ANGLE_WATER
    )


def canonical_frame_transform(positions: np.ndarray) -> tuple[np.ndarray, bool]:
    """Rotation into the reference frame of a pinned triatomic.

    Relabels the hydrogens so |R_H1| >= |R_H2| (``swapped`` reports it), then
    builds the proper rotation whose rows are (bisector, n x bisector, n):
    the molecule lands in the z=0 plane with the bond bisector along +x and
    H1 at positive y.  Reference positions are rotation @ lab positions.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.shape != (3, 3):
        raise ValueError("canonical frame needs exactly 3 atoms (O, H1, H2)")
    if np.linalg.norm(positions[0]) > 1e-10:
        raise ValueError("oxygen must be pinned at the origin")
    r1, r2 = positions[1], positions[2]
    swapped = np.linalg.norm(r1) < np.linalg.norm(r2)
    if swapped:
        r1, r2 = r2, r1
    u1 = r1 / np.linalg.norm(r1)
    u2 = r2 / np.linalg.norm(r2)
    cross = np.cross(u1, u2)
    if np.linalg.norm(cross) < 1e-8:
        raise CollinearGeometry("bond directions are collinear; frame undefined")
    b = u1 + u2
    b /= np.linalg.norm(b)
    n = np.cross(u2, u1)  # sign puts H1 at y > 0
    n /= np.linalg.norm(n)
    rotation = np.vstack([b, np.cross(n, b), n])
    return rotation, bool(swapped)
