"""Bounded-variable linear programming and the exact-discretization L1 LP.

The solver is a self-contained primal simplex for problems of the form

    minimize    c @ x
    subject to  a_eq @ x = b_eq,   lower <= x <= upper,

with per-variable bounds that may be infinite. Phase I minimizes signed
artificial variables to find a vertex; Phase II pins the artificials at
zero and optimizes the real cost. Entering and leaving variables follow
Bland's smallest-index rule: slow in pivots per second, immune to
cycling, and deterministic, which is what reproducible experiments need.

The L1 relaxation of a steering task is assembled on a uniform grid with
the exact zero-order-hold transition pair, so the discrete dynamics carry
no integration error for piecewise-constant inputs: any gap between the
LP optimum and the continuous problem is purely the control-class
restriction. Each input sample splits as u = u_plus - u_minus with
nonnegative parts, making the integral of |u| linear.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import discretize_zoh, solve_linear
from .model import Box, PiecewiseConstantControl, Problem


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class LpError(RuntimeError):
    """A relaxation LP did not come back optimal."""

    def __init__(self, status: LpStatus, context: str):
        self.status = status
        super().__init__(f"{context}: LP finished with status {status.value}")


@dataclass(frozen=True)
class LpProblem:
    """Equality-constrained LP with per-variable bounds."""

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        a = np.atleast_2d(np.asarray(self.a_eq, dtype=float))
        b = np.atleast_1d(np.asarray(self.b_eq, dtype=float))
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        n = c.size
        if a.shape[1] != n:
            raise ValueError(f"a_eq has {a.shape[1]} columns for {n} variables")
        if b.size != a.shape[0]:
            raise ValueError(f"b_eq has {b.size} entries for {a.shape[0]} rows")
        if lo.shape != (n,) or hi.shape != (n,):
            raise ValueError("bounds must match the variable count")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        for name, arr in (("c", c), ("a_eq", a), ("b_eq", b), ("lower", lo), ("upper", hi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def rows(self) -> int:
        return self.a_eq.shape[0]


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective: float
    status: LpStatus
    iterations: int


_AT_LOWER, _AT_UPPER, _FREE = 0, 1, 2
_DTOL = 1e-9  # reduced-cost optimality tolerance
_PTOL = 1e-11  # pivot-direction tolerance in the ratio test


def simplex_solve(problem: LpProblem, max_iterations: int = 10**6) -> LpSolution:
    """Solve a bounded-variable LP by two-phase primal simplex.

    Returns the classic trichotomy in ``status``; an exhausted iteration
    budget is reported as ``ITERATION_LIMIT`` rather than being passed off
    as one of the three outcomes.
    """
    n, rows = problem.n, problem.rows
    lo = np.concatenate([problem.lower, np.zeros(rows)])
    hi = np.concatenate([problem.upper, np.full(rows, np.inf)])

    # Nonbasic start: every structural variable at a finite bound.
    x = np.zeros(n + rows)
    stat = np.full(n + rows, _AT_LOWER, dtype=int)
    for j in range(n):
        if np.isfinite(lo[j]):
            x[j] = lo[j]
        elif np.isfinite(hi[j]):
            x[j], stat[j] = hi[j], _AT_UPPER
        else:
            x[j], stat[j] = 0.0, _FREE

    residual = problem.b_eq - problem.a_eq @ x[:n]
    signs = np.where(residual >= 0.0, 1.0, -1.0)
    a_full = np.hstack([problem.a_eq, np.diag(signs)])
    basis = list(range(n, n + rows))
    x[n:] = np.abs(residual)

    phase1_cost = np.concatenate([np.zeros(n), np.ones(rows)])
    iterations, status = _simplex_core(a_full, problem.b_eq, phase1_cost, lo, hi, basis, stat, x, max_iterations)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(x[:n].copy(), float("nan"), status, iterations)
    if float(phase1_cost @ x) > 1e-8 * (1.0 + float(np.abs(problem.b_eq).max(initial=0.0))):
        return LpSolution(x[:n].copy(), float("nan"), LpStatus.INFEASIBLE, iterations)

    # Phase II: artificials pinned at zero, real cost in.
    lo[n:] = 0.0
    hi[n:] = 0.0
    x[n:] = np.where(np.isin(np.arange(n, n + rows), basis), x[n:], 0.0)
    phase2_cost = np.concatenate([problem.c, np.zeros(rows)])
    more, status = _simplex_core(
        a_full, problem.b_eq, phase2_cost, lo, hi, basis, stat, x, max_iterations - iterations
    )
    iterations += more
    x_struct = np.clip(x[:n], problem.lower, problem.upper)
    objective = float(problem.c @ x_struct) if status is LpStatus.OPTIMAL else float("nan")
    return LpSolution(x_struct, objective, status, iterations)


def _simplex_core(a_full, b_eq, cost, lo, hi, basis, stat, x, budget) -> tuple[int, LpStatus]:
    """Run simplex pivots in place; returns (iterations, status)."""
    total = a_full.shape[1]
    iterations = 0
    while True:
        if iterations >= budget:
            return iterations, LpStatus.ITERATION_LIMIT
        iterations += 1

        basic_mask = np.zeros(total, dtype=bool)
        basic_mask[basis] = True
        b_mat = a_full[:, basis]
        rhs = b_eq - a_full[:, ~basic_mask] @ x[~basic_mask]
        x_basic = solve_linear(b_mat, rhs)
        x[basis] = x_basic

        y = solve_linear(b_mat.T, cost[np.asarray(basis)])
        reduced = cost - a_full.T @ y

        nonbasic = ~basic_mask
        movable = hi - lo > 0.0  # pinned variables never re-enter
        eligible = nonbasic & (
            ((stat == _FREE) & (np.abs(reduced) > _DTOL))
            | (movable & (stat == _AT_LOWER) & (reduced < -_DTOL))
            | (movable & (stat == _AT_UPPER) & (reduced > _DTOL))
        )
        candidates_idx = np.flatnonzero(eligible)
        if candidates_idx.size == 0:
            return iterations, LpStatus.OPTIMAL
        entering = int(candidates_idx[0])  # Bland: smallest index

        if stat[entering] == _FREE:
            sigma = 1.0 if reduced[entering] < 0 else -1.0
        else:
            sigma = 1.0 if stat[entering] == _AT_LOWER else -1.0

        w = solve_linear(b_mat, a_full[:, entering])
        delta = -sigma * w  # per-unit motion of the basic values

        # Candidate steps: every blocked basic variable, plus the entering
        # variable flipping to its own opposite bound.
        best_t = np.inf
        best_index = -1  # variable index, for Bland tie-breaking
        best_pos = -1
        for pos, var in enumerate(basis):
            if delta[pos] > _PTOL:
                limit = hi[var]
                t = (limit - x[var]) / delta[pos] if np.isfinite(limit) else np.inf
            elif delta[pos] < -_PTOL:
                limit = lo[var]
                t = (x[var] - limit) / (-delta[pos]) if np.isfinite(limit) else np.inf
            else:
                continue
            t = max(t, 0.0)
            if t < best_t - 1e-12 or (t <= best_t + 1e-12 and (best_index < 0 or var < best_index)):
                best_t, best_index, best_pos = t, var, pos

        flip_t = hi[entering] - lo[entering] if stat[entering] != _FREE else np.inf
        if np.isfinite(flip_t) and (
            flip_t < best_t - 1e-12
            or (flip_t <= best_t + 1e-12 and (best_index < 0 or entering < best_index))
        ):
            best_t, best_index, best_pos = flip_t, entering, -1

        if not np.isfinite(best_t):
            return iterations, LpStatus.UNBOUNDED

        if best_pos < 0:
            # Bound flip: no basis change.
            stat[entering] = _AT_UPPER if stat[entering] == _AT_LOWER else _AT_LOWER
            x[entering] = hi[entering] if stat[entering] == _AT_UPPER else lo[entering]
            continue

        leaving = basis[best_pos]
        x[entering] = x[entering] + sigma * best_t
        x[leaving] = hi[leaving] if delta[best_pos] > 0 else lo[leaving]
        stat[leaving] = _AT_UPPER if delta[best_pos] > 0 else _AT_LOWER
        basis[best_pos] = entering


# ---------------------------------------------------------------------------
# Steering-task LPs
# ---------------------------------------------------------------------------


def _transition_maps(prob: Problem, horizon: float, n_intervals: int):
    """Per-interval endpoint influence maps under exact ZOH discretization.

    Returns (maps, drift_end) with ``maps[k] = a_d^(N-1-k) @ b_d`` and
    ``drift_end = a_d^N @ A``: the final state is
    ``drift_end + sum_k maps[k] @ u_k``.
    """
    dt = horizon / n_intervals
    a_d, b_d = discretize_zoh(prob.F, prob.G, dt)
    maps = np.empty((n_intervals, prob.d, prob.m))
    maps[n_intervals - 1] = b_d
    for k in range(n_intervals - 2, -1, -1):
        maps[k] = a_d @ maps[k + 1]
    drift = prob.A.copy()
    for _ in range(n_intervals):
        drift = a_d @ drift
    return maps, drift


def _require_box(prob: Problem, what: str) -> Box:
    if not isinstance(prob.U, Box):
        raise ValueError(f"{what} is defined for box input sets only")
    return prob.U


def build_l1_lp(prob: Problem, n_intervals: int) -> LpProblem:
    """Assemble the L1-cost relaxation on a uniform n_intervals grid.

    Variables are interleaved positive/negative parts per sample and
    channel; the d equality rows pin the exact discretized endpoint.
    """
    if n_intervals < 1:
        raise ValueError("n_intervals must be at least 1")
    box = _require_box(prob, "the L1 relaxation")
    n_inputs = n_intervals * prob.m
    maps, drift = _transition_maps(prob, prob.horizon, n_intervals)
    dt = prob.horizon / n_intervals

    a_eq = np.empty((prob.d, 2 * n_inputs))
    lower = np.zeros(2 * n_inputs)
    upper = np.empty(2 * n_inputs)
    for k in range(n_intervals):
        for i in range(prob.m):
            col = 2 * (k * prob.m + i)
            a_eq[:, col] = maps[k][:, i]
            a_eq[:, col + 1] = -maps[k][:, i]
            upper[col] = box.upper[i]
            upper[col + 1] = -box.lower[i]
    return LpProblem(
        c=np.full(2 * n_inputs, dt),
        a_eq=a_eq,
        b_eq=prob.B - drift,
        lower=lower,
        upper=upper,
    )


def l1_solve(prob: Problem, n_intervals: int) -> tuple[PiecewiseConstantControl, float]:
    """Minimize the integral of |u| over the discretized steering task.

    Returns the reassembled n_intervals-segment control and the LP cost.
    """
    lp = build_l1_lp(prob, n_intervals)
    sol = simplex_solve(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise LpError(sol.status, "L1 relaxation")
    box = _require_box(prob, "the L1 relaxation")
    parts = sol.x.reshape(n_intervals, prob.m, 2)
    values = np.clip(parts[:, :, 0] - parts[:, :, 1], box.lower, box.upper)
    breakpoints = np.linspace(prob.a, prob.b, n_intervals + 1)
    return PiecewiseConstantControl(breakpoints, values), sol.objective


def linf_feasibility(prob: Problem, horizon: float, n_intervals: int) -> float:
    """Smallest uniform input-scaling s that steers A to B in ``horizon``.

    Solves the gauge form: maximize gamma subject to reaching
    gamma * (B - drift) with u in the unscaled box, then s = 1/gamma.
    A value <= 1 means the task is feasible at that horizon; +inf means
    the endpoint is unreachable in this control class at any scaling.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    box = _require_box(prob, "the feasibility test")
    maps, drift = _transition_maps(prob, horizon, n_intervals)
    target = prob.B - drift
    if float(np.abs(target).max(initial=0.0)) <= 1e-12:
        return 0.0

    n_inputs = n_intervals * prob.m
    a_eq = np.empty((prob.d, n_inputs + 1))
    lower = np.empty(n_inputs + 1)
    upper = np.empty(n_inputs + 1)
    for k in range(n_intervals):
        for i in range(prob.m):
            col = k * prob.m + i
            a_eq[:, col] = maps[k][:, i]
            lower[col] = box.lower[i]
            upper[col] = box.upper[i]
    a_eq[:, -1] = -target
    lower[-1] = 0.0
    upper[-1] = np.inf
    cost = np.zeros(n_inputs + 1)
    cost[-1] = -1.0

    sol = simplex_solve(LpProblem(cost, a_eq, np.zeros(prob.d), lower, upper))
    if sol.status is not LpStatus.OPTIMAL:
        raise LpError(sol.status, "feasibility scaling")
    gamma = float(sol.x[-1])
    if gamma <= 1e-9:
        return float("inf")
    return 1.0 / gamma
