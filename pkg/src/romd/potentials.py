"""Charge densities, local potentials, and LDA exchange-correlation."""
from __future__ import annotations

import numpy as np
from scipy.special import erfc

from . import kernels
from .errors import WidthTooSmall
from .grid import Grid3, ScalarField
from .operators import poisson_solve
from .species import AtomicConfiguration

# Slater exchange: eps_x(rho) = -C_X * rho^(1/3)
CX = 0.75 * (3.0 / np.pi) ** (1.0 / 3.0)


def _lattice_sum_args(grid: Grid3):
    return grid.shape, grid.spacings, grid.origin, grid.lengths


def core_charge_density(grid: Grid3, cfg: AtomicConfiguration) -> ScalarField:
    """Compensating Gaussian charge of all ions, total charge -sum(Z).

    Each ion contributes -Z/(sqrt(pi)*r_c)^3 * exp(-|r-R|^2_min / r_c^2).
    """
    hmax = max(grid.spacings)
    for s in cfg.species:
        if s.r_c < 2.0 * hmax:
            raise WidthTooSmall(
                f"species {s.label}: r_c={s.r_c} < 2h={2 * hmax:.3f}, Gaussian unresolvable"
            )
    if cfg.n_ions == 0:
        return ScalarField(grid, np.zeros(grid.size))
    amps = np.array([-s.Z / (np.sqrt(np.pi) * s.r_c) ** 3 for s in cfg.species])
    inv_w2 = np.array([1.0 / s.r_c**2 for s in cfg.species])
    ones = np.ones(cfg.n_ions)
    out = kernels.gaussian_poly_field(
        *_lattice_sum_args(grid), cfg.positions, amps, ones, np.zeros(cfg.n_ions), inv_w2
    )
    return ScalarField(grid, out.reshape(-1))


def short_range_potential(grid: Grid3, cfg: AtomicConfiguration) -> ScalarField:
    """Short-range local potential w(r) = sum_I (c0 + c2 d^2) exp(-d^2/r_w^2)."""
    active = [i for i, s in enumerate(cfg.species) if s.c0 != 0.0 or s.c2 != 0.0]
    if not active:
        return ScalarField(grid, np.zeros(grid.size))
    amps = np.ones(len(active))
    p0 = np.array([cfg.species[i].c0 for i in active])
    p1 = np.array([cfg.species[i].c2 for i in active])
    inv_w2 = np.array([1.0 / cfg.species[i].r_w**2 for i in active])
    out = kernels.gaussian_poly_field(
        *_lattice_sum_args(grid), cfg.positions[active], amps, p0, p1, inv_w2
    )
    return ScalarField(grid, out.reshape(-1))


def xc_energy_potential(rho: ScalarField) -> tuple[float, ScalarField]:
    """LDA exchange (Slater): E_x = int eps_x(rho)*rho, mu_x = (4/3) eps_x.

    Negative density values are clamped to zero before evaluation.
    """
    r = np.maximum(rho.values, 0.0)
    cbrt = np.cbrt(r)
    exc = -CX * cbrt
    e_xc = rho.grid.cell_volume * float(np.dot(exc, r))
    mu = ScalarField(rho.grid, (4.0 / 3.0) * exc)
    return e_xc, mu


def build_local_potential(
    rho: ScalarField,
    cfg: AtomicConfiguration,
    rho_core: ScalarField | None = None,
    w: ScalarField | None = None,
    check_neutrality: bool = True,
) -> ScalarField:
    """Total local potential: Poisson(rho + rho_s) + mu_xc(rho) + w.

    rho_core and w may be passed in to avoid rebuilding them when the ionic
    geometry has not changed (the SCF loop does this).
    """
    grid = rho.grid
    if rho_core is None:
        rho_core = core_charge_density(grid, cfg)
    if w is None:
        w = short_range_potential(grid, cfg)
    total = ScalarField(grid, rho.values + rho_core.values)
    v_es = poisson_solve(total, check_neutrality=check_neutrality)
    _, mu = xc_energy_potential(rho)
    return ScalarField(grid, v_es.values + mu.values + w.values)


def gaussian_pair_width(a, b) -> float:
    """Combined width of two compensating Gaussians."""
    return float(np.sqrt(a.r_c**2 + b.r_c**2))


def ion_ion_energy(cfg: AtomicConfiguration, lengths) -> float:
    """Gaussian self-energies plus screened point-charge pair corrections.

    Combined with 0.5*int (rho+rho_s) v_tot this reproduces the exact point
    ion-ion interaction for isolated Gaussians.
    """
    E = 0.0
    L = np.asarray(lengths)
    for i, si in enumerate(cfg.species):
        E -= si.Z**2 / (np.sqrt(2.0 * np.pi) * si.r_c)
        for j in range(i + 1, cfg.n_ions):
            sj = cfg.species[j]
            d = cfg.positions[i] - cfg.positions[j]
            d -= L * np.round(d / L)
            dist = float(np.linalg.norm(d))
            gamma = gaussian_pair_width(si, sj)
            E += si.Z * sj.Z * erfc(dist / gamma) / dist
    return E
