"""Maximum-principle certification of candidate extremals.

A candidate is a multiplier pair (eta, p_hat) together with a control and
its trajectory. The checker verifies every first-order condition:

* nontriviality -- (eta, p(t)) never vanishes; for LTI costates the flow
  is invertible, so p_hat != 0 already settles it, and the minimum costate
  norm over the grid is checked anyway;
* the adjoint equation -- analytic costate against a central-difference
  defect for LTI plants, backward RK4 integration against the Jacobian
  relation for general dynamics;
* pointwise Hamiltonian maximization -- the achieved Hamiltonian against
  the supremum over the admissible set, sampled along the trajectory with
  switching instants excluded (the condition holds almost everywhere, so
  measure-zero instants must not fail a certificate);
* constancy of the Hamiltonian off breakpoints;
* the endpoint condition.

Transversality is vacuous for fixed endpoints (the terminal costate is
unconstrained), so it reports true by construction. A passing normal
certificate on state-affine dynamics is also a local-optimality
certificate, reported via ``locally_optimal``.

Failed checks are reported, never raised: an invalid candidate is a
result, not an error. For the same reason :func:`certify` takes the raw
multiplier components instead of an :class:`AdjointParams` (whose
constructor rejects the trivial pair): feeding it eta = 0, p_hat = 0
yields a report with ``nontriviality`` false.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .control_law import AdjointParams
from .linalg import mat_exp, mat_exp_stack
from .model import Ball, Box, PiecewiseConstantControl, Problem, Trajectory
from .sim import (
    NonlinearDynamics,
    breakpoint_mask,
    endpoint_residual,
    hamiltonian_profile,
    propagate_exact,
    propagate_rk4,
)

#: Default tolerance applied to every residual check; one order above the
#: propagator accuracy budget.
DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class CertificateReport:
    eta: int
    p_hat: np.ndarray
    adjoint_residual: float
    hmax_violation: float
    constancy_spread: float
    endpoint_residual: float
    nontriviality: bool
    transversality: bool
    passed: bool
    locally_optimal: bool

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "p_hat": [float(x) for x in np.atleast_1d(self.p_hat)],
            "adjoint_residual": self.adjoint_residual,
            "hmax_violation": self.hmax_violation,
            "constancy_spread": self.constancy_spread,
            "endpoint_residual": self.endpoint_residual,
            "nontriviality": self.nontriviality,
            "transversality": self.transversality,
            "passed": self.passed,
            "locally_optimal": self.locally_optimal,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def check_adjoint(
    prob: Problem,
    ap: AdjointParams,
    traj: Trajectory | None = None,
    grid_n: int = 10001,
    dynamics: NonlinearDynamics | None = None,
) -> float:
    """Maximum defect of the adjoint equation pdot = -(dphi/dz)^T p.

    LTI: the analytic costate is checked for consistency against its own
    central finite differences. Nonlinear: requires the trajectory; the
    costate is integrated backward and the same difference defect is
    measured with the (supplied or finite-difference) Jacobian.
    """
    if dynamics is None:
        grid = np.linspace(prob.a, prob.b, grid_n)
        h = grid[1] - grid[0]
        costates = _costate_recurrence(prob, ap, grid)
        deriv = (costates[2:] - costates[:-2]) / (2.0 * h)
        defect = deriv + costates[1:-1] @ prob.F
        return float(np.abs(defect).max())
    if traj is None:
        raise ValueError("nonlinear adjoint check requires the trajectory")
    costates = _backward_adjoint(dynamics, traj, ap.p_hat)
    grid = traj.grid
    defect_max = 0.0
    for i in range(1, grid.size - 1):
        h0, h1 = grid[i] - grid[i - 1], grid[i + 1] - grid[i]
        if abs(h1 - h0) > 1e-12 * max(h0, h1):
            continue  # skip unequal spacing at segment joins
        deriv = (costates[i + 1] - costates[i - 1]) / (h0 + h1)
        jac = dynamics.jacobian(traj.states[i], traj.controls[i])
        defect_max = max(defect_max, float(np.abs(deriv + jac.T @ costates[i]).max()))
    return defect_max


def _costate_recurrence(prob: Problem, ap: AdjointParams, grid: np.ndarray) -> np.ndarray:
    """Costates on a uniform grid via the exact one-step transition."""
    h = grid[1] - grid[0]
    step = mat_exp(prob.F.T, h)
    costates = np.empty((grid.size, prob.d))
    costates[-1] = ap.p_hat
    for i in range(grid.size - 2, -1, -1):
        costates[i] = step @ costates[i + 1]
    return costates


def _backward_adjoint(dyn: NonlinearDynamics, traj: Trajectory, p_hat: np.ndarray) -> np.ndarray:
    """Backward RK4 integration of the adjoint along a sampled trajectory."""
    grid = traj.grid
    n = grid.size
    costates = np.empty((n, dyn.d))
    costates[-1] = p_hat

    def rhs(i_lo: int, i_hi: int, frac: float, p: np.ndarray) -> np.ndarray:
        z = (1.0 - frac) * traj.states[i_lo] + frac * traj.states[i_hi]
        u = traj.controls[i_lo]
        return -dyn.jacobian(z, u).T @ p

    for i in range(n - 2, -1, -1):
        h = grid[i + 1] - grid[i]
        p = costates[i + 1]
        k1 = rhs(i, i + 1, 1.0, p)
        k2 = rhs(i, i + 1, 0.5, p - 0.5 * h * k1)
        k3 = rhs(i, i + 1, 0.5, p - 0.5 * h * k2)
        k4 = rhs(i, i + 1, 0.0, p - h * k3)
        costates[i] = p - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return costates


def _sup_linear(u_set: Box | Ball, s: np.ndarray) -> np.ndarray:
    """max over v in U of <s, v> for stacked switching values s (n, m)."""
    if isinstance(u_set, Box):
        return np.where(s > 0, s * u_set.upper[None, :], s * u_set.lower[None, :]).sum(axis=1)
    return u_set.radius * np.linalg.norm(s, axis=1)


def check_hamiltonian_max(
    prob: Problem,
    ap: AdjointParams,
    traj: Trajectory,
    u: PiecewiseConstantControl,
    grid_n: int = 1001,
    dynamics: NonlinearDynamics | None = None,
    zero_tol: float = 1e-9,
) -> float:
    """Largest shortfall of the achieved Hamiltonian below its supremum.

    Samples every trajectory grid point away from switching instants. For
    LTI plants the supremum over the input set is exact (linear part at a
    vertex or along the switching direction, versus the zero input with
    its eta bonus); for general dynamics it is taken over an input grid.
    """
    if grid_n < 101:
        raise ValueError("grid_n must be at least 101")
    keep = breakpoint_mask(traj.grid, u)
    grid = traj.grid[keep]
    states = traj.states[keep]
    controls = traj.controls[keep]
    if dynamics is None:
        costates = _costates_at(prob, ap, grid)
        vel = states @ prob.F.T + controls @ prob.G.T
        bonus = ap.eta * np.all(np.abs(controls) <= zero_tol, axis=1)
        achieved = np.einsum("ij,ij->i", costates, vel) + bonus
        drift = np.einsum("ij,ij->i", costates, states @ prob.F.T)
        switching = costates @ prob.G
        sup = drift + np.maximum(_sup_linear(prob.U, switching), float(ap.eta))
        return float(np.max(sup - achieved))

    from .control_law import _input_grid

    costates = _backward_adjoint(dynamics, traj, ap.p_hat)[keep]
    if grid.size > 301:  # callback dynamics: thin the sample set
        pick = np.unique(np.linspace(0, grid.size - 1, 301).astype(int))
        grid, states, controls, costates = grid[pick], states[pick], controls[pick], costates[pick]
    inputs = _input_grid(prob.U, prob.m, grid_n)
    zero_row = np.all(inputs == 0.0, axis=1)
    shortfall = 0.0
    for i in range(grid.size):
        p, z, v = costates[i], states[i], controls[i]
        achieved = float(p @ np.asarray(dynamics.phi(z, v), dtype=float))
        if np.all(np.abs(v) <= zero_tol):
            achieved += ap.eta
        values = np.array([p @ np.asarray(dynamics.phi(z, vv), dtype=float) for vv in inputs])
        values = values + ap.eta * zero_row
        shortfall = max(shortfall, float(values.max() - achieved))
    return shortfall


def _costates_at(prob: Problem, ap: AdjointParams, grid: np.ndarray) -> np.ndarray:
    stack = prob.F.T[None, :, :] * (prob.b - grid)[:, None, None]
    return mat_exp_stack(stack) @ ap.p_hat


def check_constancy(values: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Spread (max - min) of a Hamiltonian profile over unflagged samples."""
    values = np.asarray(values, dtype=float)
    if mask is not None:
        values = values[np.asarray(mask, dtype=bool)]
    if values.size == 0:
        return 0.0
    return float(values.max() - values.min())


def certify(
    prob: Problem,
    eta: int,
    p_hat: np.ndarray,
    control: PiecewiseConstantControl,
    dynamics: NonlinearDynamics | None = None,
    adjoint_tol: float = DEFAULT_TOL,
    hmax_tol: float = DEFAULT_TOL,
    constancy_tol: float = DEFAULT_TOL,
    endpoint_tol: float = DEFAULT_TOL,
    rk4_steps: int = 20000,
    zero_tol: float = 1e-9,
) -> CertificateReport:
    """Run every certificate check on a candidate (eta, p_hat, control).

    The trajectory is propagated internally (exactly for LTI, RK4 for the
    nonlinear path). Check failures are recorded in the report; only a
    dimension mismatch raises. The trivial multiplier (0, 0) yields a
    failed report with ``nontriviality`` false and the residuals at +inf.
    """
    p_hat = np.atleast_1d(np.asarray(p_hat, dtype=float))
    if p_hat.shape != (prob.d,):
        raise ValueError(f"p_hat must be a {prob.d}-vector, got shape {p_hat.shape}")
    if eta not in (0, 1):
        raise ValueError(f"eta must be 0 or 1, got {eta}")
    prob.validate_control(control)

    inf = float("inf")
    if eta == 0 and float(np.linalg.norm(p_hat)) == 0.0:
        traj = _propagate(prob, control, dynamics, rk4_steps)
        return CertificateReport(
            eta=0,
            p_hat=p_hat,
            adjoint_residual=inf,
            hmax_violation=inf,
            constancy_spread=inf,
            endpoint_residual=endpoint_residual(traj, prob.B),
            nontriviality=False,
            transversality=True,
            passed=False,
            locally_optimal=False,
        )

    ap = AdjointParams(eta, p_hat)
    traj = _propagate(prob, control, dynamics, rk4_steps)
    end_res = endpoint_residual(traj, prob.B)

    if dynamics is None:
        adjoint_res = check_adjoint(prob, ap)
        costates = _costates_at(prob, ap, traj.grid)
        profile = hamiltonian_profile(prob, ap, traj, control, zero_tol=zero_tol)
        constancy = check_constancy(profile.values, profile.off_breakpoint)
        affine = True
    else:
        adjoint_res = check_adjoint(prob, ap, traj=traj, dynamics=dynamics)
        costates = _backward_adjoint(dynamics, traj, ap.p_hat)
        vel = np.stack(
            [np.asarray(dynamics.phi(z, u), float) for z, u in zip(traj.states, traj.controls)]
        )
        bonus = ap.eta * np.all(np.abs(traj.controls) <= zero_tol, axis=1)
        values = np.einsum("ij,ij->i", costates, vel) + bonus
        constancy = check_constancy(values, breakpoint_mask(traj.grid, control))
        affine = dynamics.affine_in_state
    hmax = check_hamiltonian_max(prob, ap, traj, control, dynamics=dynamics, zero_tol=zero_tol)

    # The costate of a nontrivial terminal vector never vanishes for LTI
    # flows; verify numerically so the nonlinear path gets the same check.
    min_costate = float(np.linalg.norm(costates, axis=1).min())
    nontrivial = eta == 1 or min_costate > 0.0

    passed = (
        nontrivial
        and adjoint_res <= adjoint_tol
        and hmax <= hmax_tol
        and constancy <= constancy_tol
        and end_res <= endpoint_tol
    )
    return CertificateReport(
        eta=int(eta),
        p_hat=ap.p_hat,
        adjoint_residual=float(adjoint_res),
        hmax_violation=float(hmax),
        constancy_spread=float(constancy),
        endpoint_residual=float(end_res),
        nontriviality=bool(nontrivial),
        transversality=True,
        passed=bool(passed),
        locally_optimal=bool(passed and eta == 1 and affine),
    )


def _propagate(prob, control, dynamics, rk4_steps) -> Trajectory:
    if dynamics is None:
        return propagate_exact(prob, control)
    return propagate_rk4(dynamics, control, prob.A, rk4_steps)
