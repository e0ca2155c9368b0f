"""Problem data, control/trajectory containers, and support-measure costs.

A steering task is a linear time-invariant plant ``zdot = F z + G u`` on a
fixed horizon [a, b] with fixed endpoints ``z(a) = A``, ``z(b) = B`` and a
compact admissible input set U (a per-channel box or a Euclidean ball, in
both cases with 0 strictly interior). Controls are represented piecewise
constant: ordered breakpoints plus one input vector per segment, each
segment right-open.

The hands-off objective is the support measure of the control: the total
time during which the input is not (numerically) the zero vector. The
identity ``support + time_at_zero = b - a`` ties it to the equivalent
indicator-integral form and is asserted by the test suite to 1e-12.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: Default magnitude below which a control sample counts as "off".
#: Solver and LP outputs carry roundoff, so exact-zero tests would
#: misclassify; override per call where tighter semantics are needed.
ZERO_TOL = 1e-9


class ValidationError(ValueError):
    """A problem or control violates a structural invariant.

    ``field`` names the offending entry so CLI error messages can point
    at the file location.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Box:
    """Per-channel box of admissible inputs, lower_i < 0 < upper_i."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _readonly(np.atleast_1d(np.asarray(self.lower, dtype=float)))
        upper = _readonly(np.atleast_1d(np.asarray(self.upper, dtype=float)))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValidationError("U", "box lower/upper must be equal-length vectors")
        if not np.all(lower < 0):
            raise ValidationError("U.lower", "0 must be strictly interior (lower_i < 0)")
        if not np.all(upper > 0):
            raise ValidationError("U.upper", "0 must be strictly interior (upper_i > 0)")

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, v: np.ndarray, tol: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= self.lower - tol) and np.all(v <= self.upper + tol))


@dataclass(frozen=True)
class Ball:
    """Euclidean ball of admissible inputs, centered at 0."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError("U.radius", f"radius must be positive, got {self.radius}")

    def contains(self, v: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.linalg.norm(np.asarray(v, dtype=float)) <= self.radius + tol)


AdmissibleSet = Box | Ball


@dataclass(frozen=True)
class Problem:
    """LTI steering task: zdot = F z + G u, z(a) = A, z(b) = B, u(t) in U."""

    F: np.ndarray
    G: np.ndarray
    a: float
    b: float
    A: np.ndarray
    B: np.ndarray
    U: AdmissibleSet

    def __post_init__(self):
        f = np.asarray(self.F, dtype=float)
        g = np.asarray(self.G, dtype=float)
        if g.ndim == 1:
            g = g[:, None]
        va = np.atleast_1d(np.asarray(self.A, dtype=float))
        vb = np.atleast_1d(np.asarray(self.B, dtype=float))
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValidationError("F", f"must be square, got shape {f.shape}")
        d = f.shape[0]
        if g.shape[0] != d:
            raise ValidationError("G", f"has {g.shape[0]} rows, expected {d}")
        if va.shape != (d,):
            raise ValidationError("A", f"must be a {d}-vector, got shape {va.shape}")
        if vb.shape != (d,):
            raise ValidationError("B", f"must be a {d}-vector, got shape {vb.shape}")
        if not self.b > self.a:
            raise ValidationError("b", f"horizon must satisfy b > a, got a={self.a}, b={self.b}")
        if isinstance(self.U, Box) and self.U.dim != g.shape[1]:
            raise ValidationError("U", f"box dimension {self.U.dim} != input dimension {g.shape[1]}")
        object.__setattr__(self, "F", _readonly(f))
        object.__setattr__(self, "G", _readonly(g))
        object.__setattr__(self, "A", _readonly(va))
        object.__setattr__(self, "B", _readonly(vb))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def d(self) -> int:
        return self.F.shape[0]

    @property
    def m(self) -> int:
        return self.G.shape[1]

    @property
    def horizon(self) -> float:
        return self.b - self.a

    def validate_control(self, u: "PiecewiseConstantControl", tol: float = 1e-9) -> None:
        """Check that a control matches this problem's horizon, input
        dimension, and admissible set."""
        if u.m != self.m:
            raise ValidationError("values", f"control has {u.m} channels, plant expects {self.m}")
        if abs(u.a - self.a) > tol or abs(u.b - self.b) > tol:
            raise ValidationError(
                "breakpoints", f"control spans [{u.a}, {u.b}], problem horizon is [{self.a}, {self.b}]"
            )
        for k, v in enumerate(u.values):
            if not self.U.contains(v, tol):
                raise ValidationError("values", f"segment {k} value {v} outside the admissible set")


@dataclass(frozen=True)
class PiecewiseConstantControl:
    """Right-open piecewise-constant control on [breakpoints[0], breakpoints[-1]].

    ``values[k]`` is the input on [breakpoints[k], breakpoints[k+1]);
    the final instant takes the last segment's value.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if t.size < 2:
            raise ValidationError("breakpoints", "need at least two breakpoints")
        if not np.all(np.diff(t) > 0):
            raise ValidationError("breakpoints", "breakpoints must be strictly increasing")
        if v.shape[0] != t.size - 1:
            raise ValidationError(
                "values", f"{v.shape[0]} segment values for {t.size - 1} segments"
            )
        object.__setattr__(self, "breakpoints", _readonly(t))
        object.__setattr__(self, "values", _readonly(v))

    @property
    def a(self) -> float:
        return float(self.breakpoints[0])

    @property
    def b(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def value_at(self, t: float) -> np.ndarray:
        """Input in effect at time t (right-limit convention)."""
        k = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        k = min(max(k, 0), self.values.shape[0] - 1)
        return self.values[k]

    def sample(self, times: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`value_at` over an array of times."""
        idx = np.searchsorted(self.breakpoints, np.asarray(times, float), side="right") - 1
        idx = np.clip(idx, 0, self.values.shape[0] - 1)
        return self.values[idx]


@dataclass(frozen=True)
class Trajectory:
    """Sampled state/control path: grid times, states, and inputs in effect."""

    grid: np.ndarray
    states: np.ndarray
    controls: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        z = np.asarray(self.states, dtype=float)
        u = np.asarray(self.controls, dtype=float)
        if z.shape[0] != g.size or u.shape[0] != g.size:
            raise ValidationError("grid", "states/controls must have one row per grid point")
        object.__setattr__(self, "grid", _readonly(g))
        object.__setattr__(self, "states", _readonly(z))
        object.__setattr__(self, "controls", _readonly(u))


@dataclass(frozen=True)
class CostReport:
    """Cost summary of a control: support measure, L1 effort, weighted
    per-channel support, and the indicator-integral objective
    ``support - (b - a)``."""

    l0_support: float
    l1_cost: float
    weighted_l0: float
    clarke_cost: float


def _off_mask(values: np.ndarray, zero_tol: float) -> np.ndarray:
    """True for segments whose value is (numerically) the zero vector."""
    return np.all(np.abs(values) <= zero_tol, axis=1)


def l0_cost(u: PiecewiseConstantControl, zero_tol: float = ZERO_TOL) -> float:
    """Support measure of a control: total length of its "on" segments.

    A segment is "off" iff every component has magnitude <= zero_tol.
    """
    on = ~_off_mask(u.values, zero_tol)
    return float(np.sum(u.segment_lengths[on]))


def zero_time(u: PiecewiseConstantControl, zero_tol: float = ZERO_TOL) -> float:
    """Total time the control is (numerically) the zero vector; the
    complement of :func:`l0_cost` on the horizon."""
    off = _off_mask(u.values, zero_tol)
    return float(np.sum(u.segment_lengths[off]))


def weighted_l0_cost(
    u: PiecewiseConstantControl, weights: np.ndarray, zero_tol: float = ZERO_TOL
) -> float:
    """Per-channel support measures combined with positive weights and
    scaled by 1/(b - a).

    With one channel and unit weight this equals ``l0_cost(u) / (b - a)``
    exactly (both reduce to the same segment-length sum).
    """
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    if w.size != u.m:
        raise ValueError(f"{w.size} weights for {u.m} channels")
    if not np.all(w > 0):
        raise ValueError("weights must be strictly positive")
    lengths = u.segment_lengths
    total = 0.0
    for i in range(u.m):
        on_i = np.abs(u.values[:, i]) > zero_tol
        total += w[i] * float(np.sum(lengths[on_i]))
    return total / (u.b - u.a)


def l1_cost(u: PiecewiseConstantControl) -> float:
    """Integral of the 1-norm of the control over the horizon."""
    return float(np.sum(u.segment_lengths * np.abs(u.values).sum(axis=1)))


def cost_report(
    u: PiecewiseConstantControl,
    weights: np.ndarray | None = None,
    zero_tol: float = ZERO_TOL,
) -> CostReport:
    """Evaluate all cost functionals of a control in one pass."""
    support = l0_cost(u, zero_tol)
    w = np.ones(u.m) if weights is None else weights
    return CostReport(
        l0_support=support,
        l1_cost=l1_cost(u),
        weighted_l0=weighted_l0_cost(u, w, zero_tol),
        clarke_cost=support - (u.b - u.a),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_PROBLEM_KEYS = ("F", "G", "a", "b", "A", "B", "U")


def problem_from_dict(data: dict) -> Problem:
    """Build a validated Problem from parsed JSON data."""
    for key in _PROBLEM_KEYS:
        if key not in data:
            raise ValidationError(key, "missing required key")
    u_spec = data["U"]
    if not isinstance(u_spec, dict) or "kind" not in u_spec:
        raise ValidationError("U", "must be an object with a 'kind' key")
    kind = u_spec["kind"]
    if kind == "box":
        if "lower" not in u_spec or "upper" not in u_spec:
            raise ValidationError("U", "box requires 'lower' and 'upper'")
        admissible: AdmissibleSet = Box(np.asarray(u_spec["lower"]), np.asarray(u_spec["upper"]))
    elif kind == "ball":
        if "radius" not in u_spec:
            raise ValidationError("U.radius", "ball requires 'radius'")
        admissible = Ball(float(u_spec["radius"]))
    else:
        raise ValidationError("U.kind", f"unknown admissible-set kind {kind!r}")
    return Problem(
        F=np.asarray(data["F"], dtype=float),
        G=np.asarray(data["G"], dtype=float),
        a=float(data["a"]),
        b=float(data["b"]),
        A=np.asarray(data["A"], dtype=float),
        B=np.asarray(data["B"], dtype=float),
        U=admissible,
    )


def problem_to_dict(prob: Problem) -> dict:
    if isinstance(prob.U, Box):
        u_spec = {"kind": "box", "lower": prob.U.lower.tolist(), "upper": prob.U.upper.tolist()}
    else:
        u_spec = {"kind": "ball", "radius": prob.U.radius}
    return {
        "F": prob.F.tolist(),
        "G": prob.G.tolist(),
        "a": prob.a,
        "b": prob.b,
        "A": prob.A.tolist(),
        "B": prob.B.tolist(),
        "U": u_spec,
    }


def load_problem(path: str | Path) -> Problem:
    """Load and validate a problem JSON file.

    Raises :class:`ValidationError` naming the offending field, or
    ``json.JSONDecodeError`` on malformed input.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValidationError("<root>", "problem file must contain a JSON object")
    try:
        return problem_from_dict(data)
    except ValidationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError("<file>", f"non-numeric or malformed entry: {exc}") from exc


def save_problem(prob: Problem, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(prob), fh, indent=2)
        fh.write("\n")


def save_control(u: PiecewiseConstantControl, path: str | Path) -> None:
    """Write a control as segment CSV: t_start, t_end, u_1..u_m.

    Values are written with 17 significant digits so a load round-trip
    reproduces the exact doubles.
    """
    lines = ["t_start,t_end," + ",".join(f"u_{i + 1}" for i in range(u.m))]
    for k in range(u.values.shape[0]):
        cells = [f"{u.breakpoints[k]:.17g}", f"{u.breakpoints[k + 1]:.17g}"]
        cells += [f"{x:.17g}" for x in u.values[k]]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_control(path: str | Path) -> PiecewiseConstantControl:
    """Read a segment CSV written by :func:`save_control`.

    Segments must tile an interval: each row's t_start equals the previous
    row's t_end.
    """
    text = Path(path).read_text(encoding="utf-8").strip()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValidationError("file", "control CSV has no segments")
    header = lines[0].split(",")
    if len(header) < 3 or header[0] != "t_start" or header[1] != "t_end":
        raise ValidationError("header", f"unexpected control CSV header {lines[0]!r}")
    m = len(header) - 2
    starts, ends, values = [], [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != m + 2:
            raise ValidationError("row", f"expected {m + 2} cells, got {len(cells)}: {ln!r}")
        starts.append(float(cells[0]))
        ends.append(float(cells[1]))
        values.append([float(c) for c in cells[2:]])
    breakpoints = [starts[0]]
    for k in range(len(starts)):
        if k > 0 and starts[k] != ends[k - 1]:
            raise ValidationError("t_start", f"segment {k} does not start where segment {k - 1} ends")
        breakpoints.append(ends[k])
    return PiecewiseConstantControl(np.asarray(breakpoints), np.asarray(values))
