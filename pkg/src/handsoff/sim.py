"""Trajectory propagation and along-trajectory Hamiltonian evaluation.

LTI plants are propagated exactly: within each constant-control segment
the state advances through the zero-order-hold transition pair, so the
only error is the matrix exponential's. General dynamics go through a
classical fixed-step fourth-order Runge-Kutta integrator whose step grid
is aligned with the control breakpoints (a segment never straddles a
control discontinuity). Fixed-step keeps regression numbers reproducible;
these problems are desk-scale, so speed is not a concern.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .control_law import AdjointParams
from .linalg import discretize_zoh, mat_exp_stack
from .model import PiecewiseConstantControl, Problem, Trajectory

#: Grid samples used by default when propagating for plots/certificates.
DEFAULT_GRID = 1000

#: Relative half-width (fraction of the horizon) of the exclusion window
#: around control breakpoints. Pointwise optimality holds almost
#: everywhere, so switching instants must not poison a profile.
BREAKPOINT_WINDOW = 1e-6


class BlowUpError(RuntimeError):
    """Integration produced a non-finite state."""


@dataclass(frozen=True)
class NonlinearDynamics:
    """User-supplied dynamics zdot = phi(z, u) for certification.

    ``jac_z`` optionally returns the state Jacobian d(phi)/dz; when absent
    a central finite difference is used. ``affine_in_state`` marks plants
    whose phi(., u) is affine for every admissible u, which is what the
    local-optimality test needs. The callbacks must be safe for repeated
    invocation; thread-safety is the caller's contract.
    """

    d: int
    m: int
    phi: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jac_z: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    affine_in_state: bool = False

    def jacobian(self, z: np.ndarray, u: np.ndarray) -> np.ndarray:
        if self.jac_z is not None:
            return np.asarray(self.jac_z(z, u), dtype=float)
        return self._fd_jacobian(z, u)

    def _fd_jacobian(self, z: np.ndarray, u: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        step = np.sqrt(np.finfo(float).eps) * (1.0 + float(np.linalg.norm(z)))
        jac = np.empty((self.d, self.d))
        for i in range(self.d):
            dz = np.zeros(self.d)
            dz[i] = step
            hi = np.asarray(self.phi(z + dz, u), dtype=float)
            lo = np.asarray(self.phi(z - dz, u), dtype=float)
            jac[:, i] = (hi - lo) / (2.0 * step)
        if not np.all(np.isfinite(jac)):
            raise BlowUpError("finite-difference Jacobian produced non-finite entries")
        return jac

    def jacobian_defect(self, z: np.ndarray, u: np.ndarray) -> float:
        """Max deviation between the supplied Jacobian and central finite
        differences at one point; 0.0 when no callback was supplied. The
        only smoothness check available to the caller."""
        if self.jac_z is None:
            return 0.0
        supplied = np.asarray(self.jac_z(z, u), dtype=float)
        return float(np.abs(supplied - self._fd_jacobian(z, u)).max())


def linear_dynamics(prob: Problem) -> NonlinearDynamics:
    """Wrap an LTI problem's vector field in the callback interface."""
    f, g = prob.F, prob.G
    return NonlinearDynamics(
        d=prob.d,
        m=prob.m,
        phi=lambda z, u: f @ z + g @ np.atleast_1d(u),
        jac_z=lambda z, u: f,
        affine_in_state=True,
    )


def _grid_with_breakpoints(a: float, b: float, breakpoints: np.ndarray, samples: int) -> np.ndarray:
    base = np.linspace(a, b, samples)
    grid = np.unique(np.concatenate([base, breakpoints]))
    return grid


def propagate_exact(
    prob: Problem, u: PiecewiseConstantControl, samples: int = DEFAULT_GRID
) -> Trajectory:
    """Exact piecewise propagation of the LTI plant under a PWC control.

    The output grid is a uniform refinement of the horizon with every
    control breakpoint inserted; states at grid points are exact up to
    matrix-exponential accuracy. Grid controls use the right-limit value.
    """
    prob.validate_control(u)
    grid = _grid_with_breakpoints(prob.a, prob.b, u.breakpoints, samples)
    states = np.empty((grid.size, prob.d))
    states[0] = prob.A
    cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    z = prob.A.copy()
    for i in range(1, grid.size):
        dt = float(grid[i] - grid[i - 1])
        pair = cache.get(dt)
        if pair is None:
            pair = discretize_zoh(prob.F, prob.G, dt)
            cache[dt] = pair
        a_d, b_d = pair
        z = a_d @ z + b_d @ u.value_at(grid[i - 1])
        states[i] = z
    return Trajectory(grid=grid, states=states, controls=u.sample(grid))


def propagate_rk4(
    dyn: NonlinearDynamics,
    u: PiecewiseConstantControl,
    initial_state: np.ndarray,
    steps: int,
) -> Trajectory:
    """Classical fixed-step RK4 under a piecewise-constant control.

    ``steps`` is the total step budget over the horizon; it is distributed
    proportionally across control segments so breakpoints always land on
    the step grid. Raises :class:`BlowUpError` on non-finite states.
    """
    if steps < 10:
        raise ValueError(f"steps must be at least 10, got {steps}")
    z = np.atleast_1d(np.asarray(initial_state, dtype=float)).copy()
    horizon = u.b - u.a
    times = [u.a]
    states = [z.copy()]
    for k in range(u.values.shape[0]):
        t0, t1 = u.breakpoints[k], u.breakpoints[k + 1]
        v = u.values[k]
        n_sub = max(1, int(round(steps * (t1 - t0) / horizon)))
        h = (t1 - t0) / n_sub
        for j in range(n_sub):
            k1 = np.asarray(dyn.phi(z, v), dtype=float)
            k2 = np.asarray(dyn.phi(z + 0.5 * h * k1, v), dtype=float)
            k3 = np.asarray(dyn.phi(z + 0.5 * h * k2, v), dtype=float)
            k4 = np.asarray(dyn.phi(z + h * k3, v), dtype=float)
            z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(z)):
                raise BlowUpError(f"state blew up near t = {t0 + (j + 1) * h:.6g}")
            times.append(t0 + (j + 1) * h)
            states.append(z.copy())
    grid = np.asarray(times)
    return Trajectory(grid=grid, states=np.asarray(states), controls=u.sample(grid))


def endpoint_residual(traj: Trajectory, target: np.ndarray) -> float:
    """Euclidean distance between the final state and the target endpoint."""
    return float(np.linalg.norm(traj.states[-1] - np.atleast_1d(np.asarray(target, float))))


@dataclass(frozen=True)
class HamiltonianProfile:
    """Hamiltonian samples along a trajectory grid.

    ``off_breakpoint`` masks the samples that are safely away from control
    switching instants; constancy statements apply to those only.
    """

    values: np.ndarray
    off_breakpoint: np.ndarray

    def spread(self) -> float:
        kept = self.values[self.off_breakpoint]
        return float(kept.max() - kept.min()) if kept.size else 0.0


def breakpoint_mask(
    grid: np.ndarray, u: PiecewiseConstantControl, window: float | None = None
) -> np.ndarray:
    """True for grid samples farther than ``window`` from any interior
    breakpoint of u."""
    if window is None:
        window = BREAKPOINT_WINDOW * (u.b - u.a)
    interior = u.breakpoints[1:-1]
    if interior.size == 0:
        return np.ones(grid.size, dtype=bool)
    dist = np.min(np.abs(grid[:, None] - interior[None, :]), axis=1)
    return dist > window


def hamiltonian_profile(
    prob: Problem,
    ap: AdjointParams,
    traj: Trajectory,
    u: PiecewiseConstantControl,
    zero_tol: float = 1e-9,
    window: float | None = None,
) -> HamiltonianProfile:
    """Hamiltonian of the extremal candidate sampled on the trajectory grid.

    Uses the analytic LTI costate. Along a genuine extremal the profile is
    constant off switching instants.
    """
    grid = traj.grid
    costates = _costates_on_grid(prob, ap, grid)
    vel = traj.states @ prob.F.T + traj.controls @ prob.G.T
    bonus = ap.eta * np.all(np.abs(traj.controls) <= zero_tol, axis=1)
    values = np.einsum("ij,ij->i", costates, vel) + bonus
    return HamiltonianProfile(values=values, off_breakpoint=breakpoint_mask(grid, u, window))


def _costates_on_grid(prob: Problem, ap: AdjointParams, grid: np.ndarray) -> np.ndarray:
    stack = prob.F.T[None, :, :] * (prob.b - grid)[:, None, None]
    return mat_exp_stack(stack) @ ap.p_hat


def save_trajectory(
    traj: Trajectory,
    path: str | Path,
    prob: Problem | None = None,
    ap: AdjointParams | None = None,
    zero_tol: float = 1e-9,
) -> None:
    """Write a trajectory CSV: t, states, controls, and (when a multiplier
    is supplied) switching components and the Hamiltonian."""
    d = traj.states.shape[1]
    m = traj.controls.shape[1]
    header = ["t"] + [f"z_{i + 1}" for i in range(d)] + [f"u_{i + 1}" for i in range(m)]
    columns = [traj.grid, traj.states, traj.controls]
    if ap is not None:
        if prob is None:
            raise ValueError("writing switching columns requires the problem")
        costates = _costates_on_grid(prob, ap, traj.grid)
        switching = costates @ prob.G
        vel = traj.states @ prob.F.T + traj.controls @ prob.G.T
        bonus = ap.eta * np.all(np.abs(traj.controls) <= zero_tol, axis=1)
        ham = np.einsum("ij,ij->i", costates, vel) + bonus
        header += [f"s_{i + 1}" for i in range(m)] + ["H"]
        columns += [switching, ham[:, None]]
    table = np.column_stack([np.atleast_2d(c.T).T if c.ndim == 1 else c for c in columns])
    lines = [",".join(header)]
    for row in table:
        lines.append(",".join(f"{x:.17g}" for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
