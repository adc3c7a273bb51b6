"""Ionic forces: analytic gradient of the discrete total energy at fixed density.

Three contributions per ion I:
  * electrostatic: -int v_tot(r) d(rho_s,I)/dR_I, with the Gaussian gradient
    in closed form on the grid (minimum image);
  * short range:   -int rho(r) d(w_I)/dR_I;
  * ion-ion:       screened pair kernel g(d) = erfc(d/gamma)/d^2
                   + 2 exp(-d^2/gamma^2)/(sqrt(pi) gamma d),
    the exact derivative of the erfc pair-energy correction.
Together these are minus the exact partial derivative of the implemented
energy with respect to R_I, so Hellmann-Feynman forces match central finite
differences of the total energy at SCF stationarity.
"""
from __future__ import annotations

import numpy as np
from scipy.special import erfc

from . import kernels
from .grid import Grid3, ScalarField
from .operators import poisson_solve
from .potentials import core_charge_density, gaussian_pair_width
from .species import AtomicConfiguration


def screened_pair_force_magnitude(d: float, gamma: float) -> float:
    """g(d): magnitude of the screened Gaussian-pair force at separation d."""
    return erfc(d / gamma) / d**2 + 2.0 * np.exp(-(d / gamma) ** 2) / (np.sqrt(np.pi) * gamma * d)


def ion_ion_forces(cfg: AtomicConfiguration, lengths) -> np.ndarray:
    L = np.asarray(lengths)
    F = np.zeros((cfg.n_ions, 3))
    for i in range(cfg.n_ions):
        si = cfg.species[i]
        for j in range(cfg.n_ions):
            if j == i:
                continue
            sj = cfg.species[j]
            d = cfg.positions[i] - cfg.positions[j]
            d -= L * np.round(d / L)
            dist = float(np.linalg.norm(d))
            g = screened_pair_force_magnitude(dist, gaussian_pair_width(si, sj))
            F[i] += si.Z * sj.Z * g * d / dist
    return F


def forces_from_density(
    rho: ScalarField,
    cfg: AtomicConfiguration,
    rho_core: ScalarField | None = None,
    v_tot: ScalarField | None = None,
) -> np.ndarray:
    """Forces for a given electronic density (FOM and ROM share this path)."""
    grid = rho.grid
    h3 = grid.cell_volume
    if rho_core is None:
        rho_core = core_charge_density(grid, cfg)
    if v_tot is None:
        v_tot = poisson_solve(ScalarField(grid, rho.values + rho_core.values))

    args = (grid.shape, grid.spacings, grid.origin, grid.lengths)
    n = cfg.n_ions
    F = np.zeros((n, 3))

    # d(rho_s,I)/dR_I = rho_s,I(r) * 2 (r - R_I)/r_c^2
    amps = np.array([-s.Z / (np.sqrt(np.pi) * s.r_c) ** 3 * 2.0 / s.r_c**2 for s in cfg.species])
    inv_w2 = np.array([1.0 / s.r_c**2 for s in cfg.species])
    m_es = kernels.gaussian_poly_moments(
        v_tot.as_3d(), *args, cfg.positions,
        np.ones(n), np.zeros(n), inv_w2,
    )
    F -= h3 * amps[:, None] * m_es

    # d(w_I)/dR_I = -2 (r - R_I) [c2 - (c0 + c2 d^2)/r_w^2] exp(-d^2/r_w^2)
    active = [i for i, s in enumerate(cfg.species) if s.c0 != 0.0 or s.c2 != 0.0]
    if active:
        p0 = np.array([cfg.species[i].c2 - cfg.species[i].c0 / cfg.species[i].r_w**2 for i in active])
        p1 = np.array([-cfg.species[i].c2 / cfg.species[i].r_w**2 for i in active])
        inv_rw2 = np.array([1.0 / cfg.species[i].r_w**2 for i in active])
        m_sr = kernels.gaussian_poly_moments(
            rho.as_3d(), *args, cfg.positions[active], p0, p1, inv_rw2
        )
        F[active] += 2.0 * h3 * m_sr

    F += ion_ion_forces(cfg, grid.lengths)
    return F


def hellmann_feynman_forces(ws, cfg: AtomicConfiguration) -> np.ndarray:
    """Forces from a wavefunction set via its Gram-inverse density."""
    from .dft import electron_density

    return forces_from_density(electron_density(ws), cfg)
