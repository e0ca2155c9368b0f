"""Built-in benchmark problems and reference solutions.

Two canonical instances exercise the whole pipeline:

* ``example_1`` -- a scalar integrator steered from 3 to 0 in 5 time
  units with |u| <= 1. Any control equal to -1 on a set of measure 3 and
  zero elsewhere is optimal; the support measure is 3.
* ``example_2`` -- a double integrator from (10, -3) to the origin in 5
  time units with |u| <= 1. The sparsest control is 0/+1/0 with switch
  times 11/6 and 29/6 (support 3 again), while the L1-relaxed problem is
  singular: its optimum is non-unique and need not be sparse.
"""

from __future__ import annotations

import numpy as np

from .model import Box, PiecewiseConstantControl, Problem


def example_1() -> Problem:
    """Scalar integrator zdot = u, z(0) = 3 -> z(5) = 0, |u| <= 1."""
    return Problem(
        F=np.array([[0.0]]),
        G=np.array([[1.0]]),
        a=0.0,
        b=5.0,
        A=np.array([3.0]),
        B=np.array([0.0]),
        U=Box(np.array([-1.0]), np.array([1.0])),
    )


def example_1_reference_control() -> PiecewiseConstantControl:
    """A canonical member of the optimal family: -1 on [0, 3), 0 after."""
    return PiecewiseConstantControl(
        np.array([0.0, 3.0, 5.0]), np.array([[-1.0], [0.0]])
    )


def example_2() -> Problem:
    """Double integrator from (10, -3) to the origin in 5 time units."""
    return Problem(
        F=np.array([[0.0, 1.0], [0.0, 0.0]]),
        G=np.array([[0.0], [1.0]]),
        a=0.0,
        b=5.0,
        A=np.array([10.0, -3.0]),
        B=np.array([0.0, 0.0]),
        U=Box(np.array([-1.0]), np.array([1.0])),
    )


def example_2_reference_control() -> PiecewiseConstantControl:
    """The sparsest steering control: off until 11/6, full thrust until
    29/6, off again."""
    return PiecewiseConstantControl(
        np.array([0.0, 11.0 / 6.0, 29.0 / 6.0, 5.0]),
        np.array([[0.0], [1.0], [0.0]]),
    )


BUILTIN = {"ex1": example_1, "ex2": example_2}


def nonsparse_l1_witness(prob: Problem) -> PiecewiseConstantControl | None:
    """A full-support control with the same L1 cost as the sparse optimum.

    For a double-integrator task steered to the origin with a nonnegative
    optimal input, the feasible set is pinned by two moments of u: its
    mass mu = -z2(0) and its first moment T*mu - V where
    V = -z1(0) - z2(0)*T. The two-parameter ansatz

        u = eps on [0, c),  u = 1 on [c, T]

    matches both moments with c = (2*T*mu - 2*V - T^2) / (mu - T) and
    eps = (mu - T + c) / c. When eps lands in (0, 1] the result is a
    feasible control of full support whose integral of |u| equals mu --
    a constructive witness that the L1 optimum is not unique and not
    sparse. Returns None when the instance does not admit this form.
    """
    d, m = prob.d, prob.m
    if (d, m) != (2, 1):
        return None
    if not isinstance(prob.U, Box):
        return None
    expected_f = np.array([[0.0, 1.0], [0.0, 0.0]])
    if not (np.array_equal(prob.F, expected_f) and np.allclose(prob.G[:, 0], [0.0, 1.0])):
        return None
    if not np.allclose(prob.B, 0.0):
        return None
    if not (np.isclose(prob.U.upper[0], 1.0) and np.isclose(prob.U.lower[0], -1.0)):
        return None

    horizon = prob.horizon
    mass = -float(prob.A[1])
    v_moment = -float(prob.A[0]) - float(prob.A[1]) * horizon
    if mass <= 0 or np.isclose(mass, horizon):
        return None
    c = (2.0 * horizon * mass - 2.0 * v_moment - horizon**2) / (mass - horizon)
    if not 0.0 < c < horizon:
        return None
    eps = (mass - horizon + c) / c
    if not 0.0 < eps <= 1.0:
        return None
    return PiecewiseConstantControl(
        np.array([prob.a, prob.a + c, prob.b]), np.array([[eps], [1.0]])
    )
