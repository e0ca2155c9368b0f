"""Small dense linear algebra kernels.

Everything here operates on desk-scale matrices (state dimensions of a
few to ~20): the matrix exponential by scaling-and-squaring, exact
zero-order-hold discretization of ``zdot = F z + G u`` via the augmented
block exponential, and a partial-pivoting linear solve that signals
numerical singularity instead of returning garbage.
"""

from __future__ import annotations

import numpy as np


class SingularMatrixError(ValueError):
    """Raised when a pivot falls below the singularity threshold."""


#: Partial-pivoting threshold below which a matrix is declared singular.
PIVOT_TOL = 1e-12

_TAYLOR_CAP = 40


def mat_exp(m: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Compute exp(m*t) for a square matrix.

    Scaling-and-squaring with a machine-terminated Taylor series: the
    argument is halved until its 1-norm is below 0.5, the series is summed
    until terms stop contributing, and the result is squared back up.
    Accurate to ~1e-12 relative for ||m*t|| up to 1e3.

    Parameters
    ----------
    m : (n, n) array_like
    t : float, optional
        Scalar factor applied to ``m`` before exponentiation.

    Returns
    -------
    (n, n) ndarray
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"mat_exp requires a square matrix, got shape {a.shape}")
    a = a * float(t)
    norm = np.linalg.norm(a, 1)
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
        a = a / (2.0**squarings)
    n = a.shape[0]
    result = np.eye(n)
    term = np.eye(n)
    for k in range(1, _TAYLOR_CAP):
        term = term @ a / k
        result = result + term
        if np.abs(term).max() <= 1e-18 * max(1.0, np.abs(result).max()):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def mat_exp_stack(ms: np.ndarray) -> np.ndarray:
    """exp() of a stack of square matrices, shape (batch, n, n).

    Same scaling-and-squaring scheme as :func:`mat_exp`, vectorized over
    the leading axis; each matrix gets its own squaring count.
    """
    a = np.array(ms, dtype=float)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"mat_exp_stack requires shape (batch, n, n), got {a.shape}")
    norms = np.abs(a).sum(axis=1).max(axis=1)
    squarings = np.zeros(a.shape[0], dtype=int)
    big = norms > 0.5
    squarings[big] = np.ceil(np.log2(norms[big] / 0.5)).astype(int)
    a = a / (2.0 ** squarings)[:, None, None]

    n = a.shape[1]
    result = np.broadcast_to(np.eye(n), a.shape).copy()
    term = result.copy()
    for k in range(1, _TAYLOR_CAP):
        term = term @ a / k
        result = result + term
        if np.abs(term).max() <= 1e-18:
            break
    for j in range(int(squarings.max()) if squarings.size else 0):
        moving = squarings > j
        result[moving] = result[moving] @ result[moving]
    return result


def discretize_zoh(f: np.ndarray, g: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact zero-order-hold discretization of ``zdot = F z + G u``.

    Returns ``(a_d, b_d)`` with ``a_d = exp(F dt)`` and
    ``b_d = int_0^dt exp(F s) ds @ G``, both obtained from one exponential
    of the augmented block matrix ``[[F, G], [0, 0]]`` so b_d inherits the
    exponential's accuracy.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    d = f.shape[0]
    if f.shape != (d, d):
        raise ValueError(f"F must be square, got shape {f.shape}")
    if g.shape[0] != d:
        raise ValueError(f"G has {g.shape[0]} rows, expected {d}")
    if not dt > 0:
        raise ValueError(f"step must be positive, got {dt}")
    m = g.shape[1]
    aug = np.zeros((d + m, d + m))
    aug[:d, :d] = f
    aug[:d, d:] = g
    e = mat_exp(aug, dt)
    return e[:d, :d], e[:d, d:]


def discretize_zoh_stack(
    f: np.ndarray, g: np.ndarray, dts: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`discretize_zoh` over a 1-D array of step lengths.

    Returns stacked ``(a_d, b_d)`` of shapes (batch, d, d) and (batch, d, m).
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    dts = np.asarray(dts, dtype=float)
    d, m = g.shape
    aug = np.zeros((d + m, d + m))
    aug[:d, :d] = f
    aug[:d, d:] = g
    stack = aug[None, :, :] * dts[:, None, None]
    e = mat_exp_stack(stack)
    return e[:, :d, :d], e[:, :d, d:]


def solve_linear(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``m @ x = rhs`` by Gaussian elimination with partial pivoting.

    Raises :class:`SingularMatrixError` when the best available pivot has
    magnitude at or below :data:`PIVOT_TOL`.
    """
    a = np.array(m, dtype=float)
    b = np.array(rhs, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"solve_linear requires a square matrix, got shape {a.shape}")
    one_d = b.ndim == 1
    if one_d:
        b = b[:, None]
    if b.shape[0] != n:
        raise ValueError(f"rhs has {b.shape[0]} rows, expected {n}")

    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(a[col:, col])))
        pivot = a[pivot_row, col]
        if abs(pivot) <= PIVOT_TOL:
            raise SingularMatrixError(
                f"pivot {abs(pivot):.3e} at column {col} below threshold {PIVOT_TOL:g}"
            )
        if pivot_row != col:
            a[[col, pivot_row]] = a[[pivot_row, col]]
            b[[col, pivot_row]] = b[[pivot_row, col]]
        factors = a[col + 1:, col] / pivot
        a[col + 1:, col:] -= factors[:, None] * a[col, col:]
        b[col + 1:] -= factors[:, None] * b[col]

    x = np.zeros_like(b)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x[:, 0] if one_d else x
