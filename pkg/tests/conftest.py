import numpy as np
import pytest

from handsoff.model import Box, PiecewiseConstantControl, Problem
from handsoff.problems import (
    example_1,
    example_1_reference_control,
    example_2,
    example_2_reference_control,
)


@pytest.fixture
def ex1() -> Problem:
    return example_1()


@pytest.fixture
def ex2() -> Problem:
    return example_2()


@pytest.fixture(scope="session")
def ex1_synth():
    from handsoff.synth import synth_l0

    return synth_l0(example_1())


@pytest.fixture(scope="session")
def ex2_synth():
    from handsoff.synth import synth_l0

    return synth_l0(example_2())


@pytest.fixture
def ex1_control() -> PiecewiseConstantControl:
    return example_1_reference_control()


@pytest.fixture
def ex2_control() -> PiecewiseConstantControl:
    return example_2_reference_control()


def random_problem(rng: np.random.Generator, d: int = 2, m: int = 1, stable: bool = True) -> Problem:
    """Random LTI steering task with a unit box input set."""
    f = rng.uniform(-1.0, 1.0, (d, d))
    if stable:
        f = f - (np.abs(np.linalg.eigvals(f).real).max() + 0.2) * np.eye(d)
    g = rng.uniform(-1.0, 1.0, (d, m))
    return Problem(
        F=f,
        G=g,
        a=0.0,
        b=float(rng.uniform(2.0, 6.0)),
        A=rng.uniform(-2.0, 2.0, d),
        B=rng.uniform(-2.0, 2.0, d),
        U=Box(-np.ones(m), np.ones(m)),
    )


def random_control(
    rng: np.random.Generator, a: float, b: float, m: int = 1, max_segments: int = 6
) -> PiecewiseConstantControl:
    """Random piecewise-constant control with some exactly-zero segments."""
    k = int(rng.integers(1, max_segments + 1))
    interior = np.sort(rng.uniform(a, b, k - 1))
    breakpoints = np.concatenate([[a], interior, [b]])
    breakpoints = np.unique(breakpoints)
    values = rng.uniform(-1.0, 1.0, (breakpoints.size - 1, m))
    off = rng.random(breakpoints.size - 1) < 0.4
    values[off] = 0.0
    return PiecewiseConstantControl(breakpoints, values)
