"""Reduced-order electronic structure: POD basis construction, the projected
density-matrix solver, and the reduced MD force provider."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import expit

from .dft import EnergyBreakdown, SolverParams, WavefunctionSet, apply_hamiltonian_batch, solve_configuration
from .errors import DegenerateFillingWarning, EmptySnapshot, InfeasibleFilling, NotConverged
from .forces import forces_from_density
from .grid import Grid3, ScalarField
from .operators import laplacian_batch_flat, poisson_solve
from .potentials import (
    core_charge_density,
    ion_ion_energy,
    short_range_potential,
    xc_energy_potential,
)
from .sampling import (
    SamplingPlan,
    WaterParameters,
    canonical_frame_transform,
    config_from_parameters,
    enumerate_training_set,
    parameters_from_positions,
)
from .species import AtomicConfiguration, Species

ORTHONORMALITY_TOL = 1e-10


@dataclass
class ReducedBasis:
    """Orthonormal POD basis under the h^3 inner product.

    ``vectors`` has shape (r, M), one basis field per row;
    ``singular_values`` keeps the full (h^3-weighted) spectrum of the
    snapshot matrix for truncation diagnostics.
    """

    grid: Grid3
    vectors: np.ndarray
    singular_values: np.ndarray
    n_occupied: int
    provenance: dict = field(default_factory=dict)
    _kinetic: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float64)
        self.singular_values = np.asarray(self.singular_values, dtype=np.float64).reshape(-1)
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.grid.size:
            raise ValueError("basis vectors must have shape (r, M)")
        if self.r < self.n_occupied:
            raise ValueError("basis dimension below the occupied-orbital count")

    @property
    def r(self) -> int:
        return self.vectors.shape[0]

    def orthonormality_defect(self) -> float:
        G = self.vectors @ self.vectors.T * self.grid.cell_volume
        return float(np.max(np.abs(G - np.eye(self.r))))

    def kinetic_projection(self) -> np.ndarray:
        """Cached T_hat = <q_i, -1/2 lap q_j> h^3 (geometry independent)."""
        if self._kinetic is None:
            kin = -0.5 * laplacian_batch_flat(self.vectors, self.grid)
            T = self.vectors @ kin.T * self.grid.cell_volume
            self._kinetic = 0.5 * (T + T.T)
        return self._kinetic


def collect_snapshots(
    grid: Grid3,
    plan: SamplingPlan,
    o_species: Species,
    h_species: Species,
    n_occupied: int,
    params: SolverParams,
) -> tuple[np.ndarray, list[WaterParameters]]:
    """Converged, orthonormalized orbitals for every training geometry.

    Rows of the returned (N0*K_train, M) array are snapshot fields in
    enumeration order.  Solver failures propagate with the offending
    parameters attached.
    """
    train = enumerate_training_set(plan)
    rows = []
    for nu in train:
        cfg = config_from_parameters(nu, o_species, h_species)
        try:
            result = solve_configuration(grid, cfg, n_occupied, params)
        except NotConverged as exc:
            exc.args = (f"training sample {nu}: {exc}",)
            raise
        rows.append(result.wavefunctions.orbitals)
    return np.vstack(rows), train


def build_reduced_basis(
    snapshots: np.ndarray,
    delta_ef: float,
    grid: Grid3,
    n_occupied: int,
    provenance: dict | None = None,
) -> ReducedBasis:
    """Thin SVD of the snapshot matrix, truncated by the energy-fraction rule.

    r is the smallest integer >= N0 with sum_{j<=r} s_j^2 >= (1 - delta_ef)
    times the total squared singular-value mass.  Orthonormality is defined
    under the h^3 inner product (the snapshots are scaled by sqrt(h^3)
    before the SVD and the basis scaled back).
    """
    snapshots = np.atleast_2d(np.asarray(snapshots, dtype=np.float64))
    if snapshots.size == 0 or not np.any(snapshots):
        raise EmptySnapshot("snapshot matrix is empty or identically zero")
    if not 0.0 <= delta_ef < 1.0:
        raise ValueError(f"delta_ef must be in [0, 1), got {delta_ef}")
    sqrt_h3 = np.sqrt(grid.cell_volume)
    # rows are snapshot fields; left singular vectors of the M x K matrix
    # are the rows of vh
    _, s, vh = scipy.linalg.svd(snapshots * sqrt_h3, full_matrices=False)
    energies = s**2
    cumulative = np.cumsum(energies)
    total = cumulative[-1]
    target = (1.0 - delta_ef) * total
    r = int(np.searchsorted(cumulative, target) + 1)
    r = min(max(r, n_occupied), len(s))
    return ReducedBasis(
        grid=grid,
        vectors=vh[:r] / sqrt_h3,
        singular_values=s,
        n_occupied=n_occupied,
        provenance=dict(provenance or {}, delta_ef=delta_ef),
    )


def reduced_density(basis: ReducedBasis, x_hat: np.ndarray) -> ScalarField:
    """rho_hat(r) = 2 sum_ij X_ij q_i(r) q_j(r); integrates to 2*trace(X)."""
    rho = 2.0 * np.einsum("im,im->m", x_hat @ basis.vectors, basis.vectors)
    return ScalarField(basis.grid, rho)


def project_hamiltonian(basis: ReducedBasis, v_loc: ScalarField) -> np.ndarray:
    """H_hat_ij = <q_i, H q_j> h^3, symmetrized."""
    hq = apply_hamiltonian_batch(v_loc, basis.vectors, basis.grid)
    H = basis.vectors @ hq.T * basis.grid.cell_volume
    return 0.5 * (H + H.T)


def fermi_occupations(
    eigenvalues: np.ndarray, kT: float, n_occupied: int
) -> tuple[np.ndarray, float]:
    """Fermi-Dirac fillings with the chemical potential fixed by bisection.

    Solves sum_i 1/(exp((e_i - mu)/kT) + 1) = N0 to |sum f - N0| <= 1e-12
    on the bracket [min(e) - 30 kT, max(e) + 30 kT].
    """
    if kT <= 0:
        raise ValueError("kT must be positive")
    eigenvalues = np.asarray(eigenvalues, dtype=float).reshape(-1)
    r = eigenvalues.size
    if n_occupied > r:
        raise InfeasibleFilling(f"N0={n_occupied} exceeds basis dimension r={r}")
    if n_occupied == r:
        warnings.warn(
            "N0 equals the basis dimension; all states forced fully occupied",
            DegenerateFillingWarning,
            stacklevel=2,
        )
        return np.ones(r), float(eigenvalues.max() + 30.0 * kT)

    def filling(mu):
        return expit((mu - eigenvalues) / kT)

    lo = float(eigenvalues.min() - 30.0 * kT)
    hi = float(eigenvalues.max() + 30.0 * kT)
    mu = 0.5 * (lo + hi)
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        excess = float(np.sum(filling(mu))) - n_occupied
        if abs(excess) <= 1e-12:
            break
        if excess > 0:
            hi = mu
        else:
            lo = mu
    f = filling(mu)
    return f, mu


@dataclass
class ReducedDensityMatrix:
    """Symmetric occupation operator in the reduced basis: trace N0,
    spectrum in [0, 1]."""

    x_hat: np.ndarray
    chemical_potential: float
    occupations: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.x_hat))

    def spectrum(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.x_hat)


def _density_functionals(basis, x_hat, cfg, rho_core, w):
    """Shared per-iterate quantities: density, local potential, KS energy."""
    grid = basis.grid
    h3 = grid.cell_volume
    rho = reduced_density(basis, x_hat)
    total_charge = ScalarField(grid, rho.values + rho_core.values)
    v_tot = poisson_solve(total_charge)
    e_xc, mu_xc = xc_energy_potential(rho)
    v_loc = ScalarField(grid, v_tot.values + mu_xc.values + w.values)
    t_s = 2.0 * float(np.sum(x_hat * basis.kinetic_projection()))
    e_es = 0.5 * h3 * float(np.dot(total_charge.values, v_tot.values))
    e_es += ion_ion_energy(cfg, grid.lengths)
    e_sr = h3 * float(np.dot(rho.values, w.values))
    breakdown = EnergyBreakdown(T_s=t_s, E_es=e_es, E_xc=e_xc, E_sr=e_sr)
    return rho, v_loc, breakdown


def entropy_term(occupations: np.ndarray) -> float:
    """Dimensionless electronic entropy sum: -2 sum [f ln f + (1-f) ln(1-f)].

    Occupations are clamped to [1e-15, 1 - 1e-15] before the logs.
    """
    f = np.clip(occupations, 1e-15, 1.0 - 1e-15)
    return -2.0 * float(np.sum(f * np.log(f) + (1.0 - f) * np.log(1.0 - f)))


def mermin_free_energy(
    x_hat: np.ndarray,
    basis: ReducedBasis,
    cfg: AtomicConfiguration,
    kT: float,
    rho_core: ScalarField | None = None,
    w: ScalarField | None = None,
) -> float:
    """A_r = E_KS[{q_i}, X_hat] - kT * S_r / k_B, entropy from eigenvalues of X_hat."""
    grid = basis.grid
    if rho_core is None:
        rho_core = core_charge_density(grid, cfg)
    if w is None:
        w = short_range_potential(grid, cfg)
    _, _, breakdown = _density_functionals(basis, x_hat, cfg, rho_core, w)
    f = scipy.linalg.eigvalsh(x_hat)
    return breakdown.total - kT * entropy_term(f)


@dataclass(frozen=True)
class DMParams:
    k_dm: int = 200
    delta_dm: float = 1e-6
    beta: float = 0.8
    kT: float = 1e-3


@dataclass
class DMResult:
    dm: ReducedDensityMatrix
    energy: EnergyBreakdown
    free_energy: float
    iterations: int
    last_delta: float


def dm_solve(
    basis: ReducedBasis,
    cfg: AtomicConfiguration,
    params: DMParams,
    x0: np.ndarray | None = None,
) -> DMResult:
    """Fixed-mixing density-matrix iteration in the reduced basis.

    Per iteration: project the Hamiltonian at the current density, solve the
    r x r symmetric eigenproblem, fill states by Fermi-Dirac occupations with
    the bisected chemical potential, and mix
    X_{k+1} = (1 - beta) X_k + beta V F V^T.  Stops when the Mermin free
    energy changes by less than delta_dm between consecutive iterates.
    """
    if not 0.0 < params.beta <= 1.0:
        raise ValueError("beta must be in (0, 1]")
    grid = basis.grid
    r = basis.r
    n0 = basis.n_occupied
    rho_core = core_charge_density(grid, cfg)
    w = short_range_potential(grid, cfg)

    if x0 is None:
        x = np.diag(np.concatenate([np.ones(n0), np.zeros(r - n0)]))
    else:
        x = 0.5 * (x0 + x0.T)
    occ = np.concatenate([np.ones(n0), np.zeros(r - n0)])
    mu = 0.0
    a_prev = None
    for k in range(params.k_dm + 1):
        rho, v_loc, breakdown = _density_functionals(basis, x, cfg, rho_core, w)
        a_now = breakdown.total - params.kT * entropy_term(scipy.linalg.eigvalsh(x))
        if a_prev is not None and abs(a_now - a_prev) < params.delta_dm:
            dm = ReducedDensityMatrix(x_hat=x, chemical_potential=mu, occupations=occ)
            return DMResult(
                dm=dm,
                energy=breakdown,
                free_energy=a_now,
                iterations=k,
                last_delta=abs(a_now - a_prev),
            )
        if k == params.k_dm:
            delta = np.inf if a_prev is None else abs(a_now - a_prev)
            raise NotConverged(
                f"density-matrix solve hit k_dm={params.k_dm}; "
                f"last free-energy delta {delta:.3e}",
                iterations=k,
                residual=delta,
            )
        h_hat = basis.kinetic_projection() + _potential_projection(basis, v_loc)
        evals, vecs = scipy.linalg.eigh(h_hat)
        occ, mu = fermi_occupations(evals, params.kT, n0)
        x_next = (1.0 - params.beta) * x + params.beta * (vecs * occ) @ vecs.T
        x = 0.5 * (x_next + x_next.T)
        a_prev = a_now
    raise AssertionError("unreachable")


def _potential_projection(basis: ReducedBasis, v_loc: ScalarField) -> np.ndarray:
    vq = v_loc.values[None, :] * basis.vectors
    H = basis.vectors @ vq.T * basis.grid.cell_volume
    return 0.5 * (H + H.T)


def rom_forces(
    basis: ReducedBasis, x_hat: np.ndarray, cfg: AtomicConfiguration
) -> np.ndarray:
    """Hellmann-Feynman forces evaluated with the reduced density."""
    return forces_from_density(reduced_density(basis, x_hat), cfg)


@dataclass
class ForceEvaluation:
    forces: np.ndarray
    e_ks: float
    iterations: int
    breakdown: EnergyBreakdown | None = None


class RomStepProvider:
    """Per-step ROM force evaluation in the canonical frame.

    Transforms the lab geometry into the reference frame, warm-starts the
    density-matrix solve from the previous step, and rotates the resulting
    forces back (transpose rotation, hydrogens un-swapped).
    """

    def __init__(self, basis: ReducedBasis, params: DMParams, warn_outside_domain: bool = True):
        self.basis = basis
        self.params = params
        self.warn_outside_domain = warn_outside_domain
        self._x_prev: np.ndarray | None = None
        self._swapped_prev: bool | None = None

    def __call__(self, cfg: AtomicConfiguration, step: int) -> ForceEvaluation:
        rotation, swapped = canonical_frame_transform(cfg.positions)
        ref_positions = cfg.positions @ rotation.T
        if swapped:
            ref_positions = ref_positions[[0, 2, 1]]
        if self.warn_outside_domain:
            parameters_from_positions(ref_positions).warn_if_outside()
        ref_cfg = cfg.with_positions(ref_positions)
        x0 = self._x_prev if swapped == self._swapped_prev else None
        result = dm_solve(self.basis, ref_cfg, self.params, x0=x0)
        self._x_prev = result.dm.x_hat
        self._swapped_prev = swapped
        f_ref = rom_forces(self.basis, result.dm.x_hat, ref_cfg)
        if swapped:
            f_ref = f_ref[[0, 2, 1]]
        f_lab = f_ref @ rotation
        return ForceEvaluation(
            forces=f_lab,
            e_ks=result.energy.total,
            iterations=result.iterations,
            breakdown=result.energy,
        )


class FomStepProvider:
    """Full-order force evaluation with warm-started orbitals."""

    def __init__(self, grid: Grid3, n_occupied: int, params: SolverParams):
        self.grid = grid
        self.n_occupied = n_occupied
        self.params = params
        self._phi_prev: WavefunctionSet | None = None

    def __call__(self, cfg: AtomicConfiguration, step: int) -> ForceEvaluation:
        result = solve_configuration(
            self.grid, cfg, self.n_occupied, self.params, phi0=self._phi_prev
        )
        self._phi_prev = result.wavefunctions
        from .forces import hellmann_feynman_forces

        forces = hellmann_feynman_forces(result.wavefunctions, cfg)
        return ForceEvaluation(
            forces=forces,
            e_ks=result.energy.total,
            iterations=result.iterations,
            breakdown=result.energy,
        )
