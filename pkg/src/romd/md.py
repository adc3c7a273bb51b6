"""Verlet integration and the Born-Oppenheimer MD driver."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry, MissingForces
from .species import AtomicConfiguration


@dataclass
class MDState:
    positions_now: np.ndarray
    positions_prev: np.ndarray
    velocities_init: np.ndarray
    forces_now: np.ndarray | None
    step_index: int
    time: float


@dataclass(frozen=True)
class MDParams:
    dt: float
    n_steps: int
    verlet_paper_halved: bool = False
    initial_velocities: np.ndarray | None = None


@dataclass
class TrajectoryStep:
    step: int
    time: float
    positions: np.ndarray
    forces: np.ndarray
    L1: float
    L2: float
    theta_deg: float
    e_ks: float
    iterations: int
    e_total: float = np.nan  # filled in after the run (needs velocities)


@dataclass
class Trajectory:
    steps: list[TrajectoryStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.steps])


def verlet_step(state: MDState, masses: np.ndarray, dt: float, pinned: np.ndarray,
                paper_halved: bool = False) -> MDState:
    """One position-Verlet update; pinned ions never move.

    Step 0 uses R + dt*V0 + dt^2/(2M)*F.  Later steps use the standard
    2R_k - R_{k-1} + dt^2/M * F_k; ``paper_halved`` switches the coefficient
    of the force term to dt^2/(2M) (not energy conserving, provided for
    comparison runs only).
    """
    if state.forces_now is None:
        raise MissingForces("verlet_step called before forces were assigned")
    if dt <= 0:
        raise ValueError("dt must be positive")
    m = np.asarray(masses, dtype=float).reshape(-1, 1)
    R = state.positions_now
    if state.step_index == 0:
        nxt = R + dt * state.velocities_init + (dt * dt / (2.0 * m)) * state.forces_now
    else:
        coeff = dt * dt / (2.0 * m) if paper_halved else dt * dt / m
        nxt = 2.0 * R - state.positions_prev + coeff * state.forces_now
    nxt = np.where(pinned[:, None], R, nxt)
    prev = np.where(pinned[:, None], nxt, R)
    return MDState(
        positions_now=nxt,
        positions_prev=prev,
        velocities_init=state.velocities_init,
        forces_now=None,
        step_index=state.step_index + 1,
        time=state.time + dt,
    )


def bond_observables(positions: np.ndarray) -> tuple[float, float, float]:
    """Bond lengths and angle for a triatomic in (O, H1, H2) order."""
    positions = np.asarray(positions, dtype=float)
    if positions.shape != (3, 3):
        raise ValueError("bond observables need exactly 3 atoms")
    b1 = positions[1] - positions[0]
    b2 = positions[2] - positions[0]
    L1 = float(np.linalg.norm(b1))
    L2 = float(np.linalg.norm(b2))
    if min(L1, L2) < 1e-6:
        raise DegenerateGeometry(f"bond length below 1e-6 Bohr (L1={L1:.2e}, L2={L2:.2e})")
    c = float(np.dot(b1, b2) / (L1 * L2))
    theta = float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))
    return L1, L2, theta


def kinetic_energy(velocities: np.ndarray, masses: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.asarray(masses) * np.sum(velocities**2, axis=1)))


def bomd_run(cfg0: AtomicConfiguration, md_params: MDParams, force_provider) -> Trajectory:
    """Algorithm-2-style time loop.

    ``force_provider(cfg, step)`` returns an object with attributes
    ``forces`` (n,3), ``e_ks`` (KS total energy), and ``iterations``.
    The trajectory records the per-step total energy E_KS plus the ionic
    kinetic energy from central-difference velocities; at step 0 the given
    initial velocities are used instead.
    """
    if md_params.n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    n = cfg0.n_ions
    v0 = md_params.initial_velocities
    v0 = np.zeros((n, 3)) if v0 is None else np.asarray(v0, dtype=float).reshape(n, 3)
    masses = cfg0.masses
    pinned = cfg0.pinned

    state = MDState(
        positions_now=cfg0.positions.copy(),
        positions_prev=cfg0.positions.copy(),
        velocities_init=v0,
        forces_now=None,
        step_index=0,
        time=0.0,
    )
    traj = Trajectory()
    positions_log = []
    for k in range(md_params.n_steps):
        cfg_k = cfg0.with_positions(state.positions_now)
        try:
            ev = force_provider(cfg_k, k)
        except Exception as exc:
            exc.args = (f"MD step {k}: {exc}",)
            raise
        state.forces_now = np.asarray(ev.forces, dtype=float).reshape(n, 3)
        L1, L2, theta = bond_observables(state.positions_now) if n == 3 else (np.nan,) * 3
        traj.steps.append(
            TrajectoryStep(
                step=k,
                time=state.time,
                positions=state.positions_now.copy(),
                forces=state.forces_now.copy(),
                L1=L1,
                L2=L2,
                theta_deg=theta,
                e_ks=ev.e_ks,
                iterations=ev.iterations,
            )
        )
        positions_log.append(state.positions_now.copy())
        state = verlet_step(state, masses, md_params.dt, pinned, md_params.verlet_paper_halved)
    positions_log.append(state.positions_now.copy())  # R(t_K), for the last velocity

    for k, step in enumerate(traj.steps):
        if k == 0:
            vel = v0
        else:
            vel = (positions_log[k + 1] - positions_log[k - 1]) / (2.0 * md_params.dt)
        step.e_total = step.e_ks + kinetic_energy(vel, masses)
    return traj
