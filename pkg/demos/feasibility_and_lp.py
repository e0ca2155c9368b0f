"""Feasibility diagnostics: minimum transfer time and input-scaling LPs.

Before asking for a sparse control it pays to know whether the steering
task is possible at all. The feasibility scaling s(T) is the smallest
uniform inflation of the input set that reaches the target in horizon T;
s <= 1 means feasible, and bisecting it gives the minimum transfer time.

Run: python demos/feasibility_and_lp.py
"""

import numpy as np

from handsoff import LpProblem, linf_feasibility, min_time, simplex_solve
from handsoff.problems import example_1, example_2

prob = example_1()
print("scalar integrator, steer 3 -> 0 with |u| <= 1:")
for horizon in (5.0, 4.0, 3.0, 2.5):
    s = linf_feasibility(prob, horizon, 400)
    verdict = "feasible" if s <= 1.0 + 1e-9 else "infeasible"
    print(f"  horizon {horizon:3.1f}: scaling {s:.4f}  -> {verdict}")
print(f"  minimum transfer time: {min_time(prob):.4f}  (analytic: 3)")

prob2 = example_2()
print(f"\ndouble integrator benchmark: minimum transfer time {min_time(prob2):.4f}")
print("(the 5-unit horizon leaves slack, which is what the hands-off")
print(" synthesis spends as zero-input time)")

print("\nThe machinery underneath is a bounded-variable simplex:")
lp = LpProblem(
    c=[-3.0, -5.0],
    a_eq=[[1.0, 2.0]],
    b_eq=[4.0],
    lower=[0.0, 0.0],
    upper=[3.0, 3.0],
)
sol = simplex_solve(lp)
print(f"  min -3x - 5y  s.t. x + 2y = 4, 0 <= x, y <= 3")
print(f"  -> x = {sol.x[0]:.1f}, y = {sol.x[1]:.1f}, objective {sol.objective:.1f} "
      f"({sol.iterations} pivots, status {sol.status.value})")
