"""
Convergence rates on a small LASSO
==================================

A 20 x 50 LASSO problem is solved by plain forward-backward and by several
accelerated schedules. Its minimizer comes from running forward-backward
until it reaches an exact floating-point fixed point, which lets us watch
the rate-scaled objective gap, the rate-scaled step length and the
Lyapunov quantity epsilon_k.
"""

import numpy as np

from afba import SolveConfig, classic_nesterov, generalized_nesterov, no_momentum, solve
from afba.harness import decile_medians, rate_report
from afba.problems import make_lasso

problem, A, c = make_lasso(20, 50, 0.1, seed=1)
print(f"L = {problem.lipschitz:.4f}, beta = 1/L = {problem.max_step():.4g}")

# Reference minimizer: forward-backward until T x = x in floating point
x_ref, ref = solve(problem, SolveConfig(no_momentum(), max_iters=10**6, trace_every=10**6))
f_ref = problem.objective(x_ref)
print(f"reference F* = {f_ref!r} after {ref.iters_run} iterations, "
      f"{np.count_nonzero(x_ref)} nonzeros")

horizon = 20000
schedules = [
    no_momentum(),
    classic_nesterov(),
    generalized_nesterov(0.5, 1.0, 1.0),
    generalized_nesterov(0.75, 0.3, 1.0),
    generalized_nesterov(1.0, 0.4, 1.0),
]

# Objective gap after a few iteration counts
print("\nF(x^k) - F* at k = 100, 1000, 10000")
traces = {}
for s in schedules:
    _, tr = solve(problem, SolveConfig(s, max_iters=horizon), f_ref=f_ref, x_ref=x_ref)
    traces[s.name] = (s, tr)
    print(f"  {s.name:26s}", "  ".join(f"{tr['eta'][k - 1]:.2e}" for k in (100, 1000, 10000)))

# Decile medians of t_{k-1}^2 eta_k shrink: the gap decays faster than 1/t_k^2
print("\nscaled gap, first vs last decile median")
for name, (s, tr) in traces.items():
    if s.has_momentum:
        first, last = decile_medians(tr["scaled_fv"])
        print(f"  {name:26s} {first:.3e} -> {last:.3e}")

# The full report, including the epsilon checks, for one schedule
s, tr = traces["gn(omega=0.5,a=1,b=1)"]
print()
print(rate_report(tr, s).text())
