"""Full-order Kohn-Sham solver: density, energies, and the preconditioned
gradient optimizer with one-step Anderson extrapolation.

Wavefunction sets are stored row-wise: ``orbitals`` has shape (N, M), one
flat field per row.  All Gram-type inner products carry the quadrature
weight h^3 explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotConverged, SingularGram
from .grid import Grid3, ScalarField
from .operators import laplacian_batch_flat, poisson_solve, precondition_batch_flat
from .potentials import (
    build_local_potential,
    core_charge_density,
    ion_ion_energy,
    short_range_potential,
    xc_energy_potential,
)
from .species import AtomicConfiguration

GRAM_CONDITION_LIMIT = 1e12


@dataclass
class WavefunctionSet:
    """Discretized trial wavefunctions (not necessarily orthonormal)."""

    grid: Grid3
    orbitals: np.ndarray       # (N, M), row i = phi_i
    n_occupied: int

    def __post_init__(self):
        self.orbitals = np.ascontiguousarray(self.orbitals, dtype=np.float64)
        if self.orbitals.ndim != 2 or self.orbitals.shape[1] != self.grid.size:
            raise ValueError("orbitals must have shape (N, M)")
        if self.n_occupied > self.n_orbitals:
            raise ValueError("n_occupied exceeds number of orbitals")

    @property
    def n_orbitals(self) -> int:
        return self.orbitals.shape[0]

    def copy(self) -> "WavefunctionSet":
        return WavefunctionSet(self.grid, self.orbitals.copy(), self.n_occupied)


@dataclass(frozen=True)
class EnergyBreakdown:
    T_s: float
    E_es: float
    E_xc: float
    E_sr: float

    @property
    def total(self) -> float:
        return self.T_s + self.E_es + self.E_xc + self.E_sr


def gram_matrix(ws: WavefunctionSet) -> np.ndarray:
    return ws.orbitals @ ws.orbitals.T * ws.grid.cell_volume


def gram_inverse(S: np.ndarray) -> np.ndarray:
    """Inverse of the (small) Gram matrix with a condition-number guard."""
    evals, vecs = scipy.linalg.eigh(S)
    if evals[0] <= 0 or evals[-1] / evals[0] > GRAM_CONDITION_LIMIT:
        raise SingularGram(
            f"Gram matrix condition number {evals[-1] / max(evals[0], 1e-300):.2e} "
            f"exceeds {GRAM_CONDITION_LIMIT:.0e}"
        )
    return (vecs / evals) @ vecs.T


def _solve_gram(S: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return gram_inverse(S) @ rhs


def electron_density(ws: WavefunctionSet) -> ScalarField:
    """rho(r) = 2 * sum_ij (S^-1)_ij phi_i(r) phi_j(r); integrates to 2N."""
    S = gram_matrix(ws)
    W = _solve_gram(S, ws.orbitals)
    rho = 2.0 * np.einsum("im,im->m", W, ws.orbitals)
    return ScalarField(ws.grid, rho)


def apply_hamiltonian_batch(v_loc: ScalarField, orbitals: np.ndarray, grid: Grid3) -> np.ndarray:
    """H phi = -1/2 lap(phi) + v_loc * phi for each row of a (k, M) batch."""
    return -0.5 * laplacian_batch_flat(orbitals, grid) + v_loc.values[None, :] * orbitals


def apply_hamiltonian(v_loc: ScalarField, ws: WavefunctionSet) -> np.ndarray:
    return apply_hamiltonian_batch(v_loc, ws.orbitals, ws.grid)


def scf_residual(ws: WavefunctionSet, h_phi: np.ndarray) -> np.ndarray:
    """R = H Phi - Phi S^-1 (Phi^T H Phi h^3), rows matching ``orbitals``."""
    h3 = ws.grid.cell_volume
    S = gram_matrix(ws)
    A = ws.orbitals @ h_phi.T * h3          # A_ij = <phi_i, H phi_j>
    return h_phi - _solve_gram(S, A).T @ ws.orbitals


def residual_norm(residual: np.ndarray, grid: Grid3) -> float:
    """Frobenius norm scaled by sqrt(h^3) (discretization-consistent)."""
    return float(np.linalg.norm(residual)) * np.sqrt(grid.cell_volume)


def anderson_coefficient(p_k: np.ndarray, p_km1: np.ndarray) -> float:
    """theta = <P_k - P_km1, P_k>_F / ||P_k - P_km1||_F^2, 0 when degenerate."""
    diff = p_k - p_km1
    denom = float(np.vdot(diff, diff))
    norm_pk = float(np.linalg.norm(p_k))
    if np.sqrt(denom) < 1e-14 * max(norm_pk, 1e-300):
        return 0.0
    return float(np.vdot(diff, p_k)) / denom


def orthonormalize(orbitals: np.ndarray, grid: Grid3) -> np.ndarray:
    """Cholesky orthonormalization under the h^3 inner product."""
    S = orbitals @ orbitals.T * grid.cell_volume
    Lc = scipy.linalg.cholesky(S, lower=True)
    return scipy.linalg.solve_triangular(Lc, orbitals, lower=True)


def initial_guess(
    grid: Grid3, n_orbitals: int, seed: int, smoothing_shift: float = 0.3
) -> np.ndarray:
    """Seeded random fields, low-pass filtered and orthonormalized."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n_orbitals, grid.size))
    smooth = precondition_batch_flat(raw, smoothing_shift, grid)
    return orthonormalize(smooth, grid)


def total_energy(
    ws: WavefunctionSet,
    cfg: AtomicConfiguration,
    rho_core: ScalarField | None = None,
    w: ScalarField | None = None,
) -> EnergyBreakdown:
    """Kohn-Sham total energy with Gaussian-compensated electrostatics.

    E_es = 0.5 * int (rho + rho_s) v_tot  -  sum_I Z_I^2/(sqrt(2 pi) r_c)
           + sum_{I<J} Z_I Z_J erfc(d/gamma)/d
    which reproduces Hartree + pseudo + point ion-ion energy exactly for
    isolated Gaussians.
    """
    grid = ws.grid
    h3 = grid.cell_volume
    if rho_core is None:
        rho_core = core_charge_density(grid, cfg)
    if w is None:
        w = short_range_potential(grid, cfg)

    S = gram_matrix(ws)
    W = _solve_gram(S, ws.orbitals)
    rho_vals = 2.0 * np.einsum("im,im->m", W, ws.orbitals)
    rho = ScalarField(grid, rho_vals)

    kin = -0.5 * laplacian_batch_flat(ws.orbitals, grid)
    T_s = 2.0 * float(np.einsum("im,im->", W, kin)) * h3

    total_charge = ScalarField(grid, rho.values + rho_core.values)
    v_tot = poisson_solve(total_charge)
    E_es = 0.5 * h3 * float(np.dot(total_charge.values, v_tot.values))
    E_es += ion_ion_energy(cfg, grid.lengths)

    E_xc, _ = xc_energy_potential(rho)
    E_sr = h3 * float(np.dot(rho.values, w.values))
    return EnergyBreakdown(T_s=T_s, E_es=E_es, E_xc=E_xc, E_sr=E_sr)


@dataclass
class ScfResult:
    wavefunctions: WavefunctionSet
    energy: EnergyBreakdown
    iterations: int
    residual: float


def abpg_solve(
    cfg: AtomicConfiguration,
    phi0: WavefunctionSet,
    k_es: int = 500,
    delta_es: float = 1e-8,
    sigma: float = 0.5,
    orthonormalize_result: bool = True,
) -> ScfResult:
    """Preconditioned gradient descent with one-step Anderson extrapolation.

    Per iteration the density, local potential, and residual
    R = H Phi - Phi S^-1 (Phi^T H Phi h^3) are rebuilt; iteration stops when
    the scaled Frobenius norm of R drops below delta_es.  The first step is
    Phi - K R; later steps mix in the previous iterate and preconditioned
    residual with the extrapolation coefficient theta.
    """
    if k_es < 1:
        raise ValueError("k_es must be >= 1")
    grid = phi0.grid
    h3 = grid.cell_volume
    rho_core = core_charge_density(grid, cfg)
    w = short_range_potential(grid, cfg)

    phi = phi0.orbitals.copy()
    n0 = phi0.n_occupied
    phi_prev = None
    p_prev = None
    res = np.inf
    iterations = 0

    for k in range(k_es + 1):
        ws = WavefunctionSet(grid, phi, n0)
        S = gram_matrix(ws)
        W = _solve_gram(S, phi)
        rho = ScalarField(grid, 2.0 * np.einsum("im,im->m", W, phi))
        v_loc = build_local_potential(rho, cfg, rho_core=rho_core, w=w)
        h_phi = apply_hamiltonian_batch(v_loc, phi, grid)
        A = phi @ h_phi.T * h3
        R = h_phi - _solve_gram(S, A).T @ phi
        res = residual_norm(R, grid)
        iterations = k
        if res < delta_es:
            break
        if k == k_es:
            result = _finalize(grid, phi, n0, cfg, rho_core, w, orthonormalize_result, k, res)
            raise NotConverged(
                f"ABPG hit the iteration cap k_es={k_es} with residual {res:.3e}",
                iterations=k,
                residual=res,
                result=result,
            )
        P = precondition_batch_flat(R, sigma, grid)
        if phi_prev is None:
            phi_next = phi - P
        else:
            theta = anderson_coefficient(P, p_prev)
            phi_next = phi + theta * (phi_prev - phi) - (P + theta * (p_prev - P))
        phi_prev = phi
        p_prev = P
        phi = phi_next

    return _finalize(grid, phi, n0, cfg, rho_core, w, orthonormalize_result, iterations, res)


def _finalize(grid, phi, n0, cfg, rho_core, w, do_orth, iterations, res) -> ScfResult:
    if do_orth:
        phi = orthonormalize(phi, grid)
    ws = WavefunctionSet(grid, phi, n0)
    energy = total_energy(ws, cfg, rho_core=rho_core, w=w)
    return ScfResult(wavefunctions=ws, energy=energy, iterations=iterations, residual=res)


@dataclass(frozen=True)
class SolverParams:
    k_es: int = 500
    delta_es: float = 1e-8
    sigma: float = 1.0
    seed: int = 1234


def solve_configuration(
    grid: Grid3,
    cfg: AtomicConfiguration,
    n_occupied: int,
    params: SolverParams,
    phi0: WavefunctionSet | None = None,
) -> ScfResult:
    """Cold- or warm-started SCF for one geometry."""
    if phi0 is None:
        phi0 = WavefunctionSet(grid, initial_guess(grid, n_occupied, params.seed), n_occupied)
    return abpg_solve(
        cfg, phi0, k_es=params.k_es, delta_es=params.delta_es, sigma=params.sigma
    )
