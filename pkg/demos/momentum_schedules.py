"""
Momentum schedules and their gap inequality
===========================================

Every accelerated run is driven by a sequence t_k; the extrapolation
weight is theta_k = (t_{k-1} - 1) / t_k. This script prints a few weights,
scans each schedule for the four Momentum-Condition hypotheses, and shows
why power schedules with omega > 1 are ruled out.
"""

import warnings

import numpy as np

from afba import (
    chambolle_dossal,
    check_momentum_condition,
    classic_nesterov,
    generalized_nesterov,
    super_linear_divergence,
)

# A handful of schedules, including two that break the strict gap inequality
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    schedules = [
        classic_nesterov(),
        chambolle_dossal(3.01),
        generalized_nesterov(1.0, 1 / 2.01, 5.0),
        generalized_nesterov(0.5, 1.0, 1.0),
        generalized_nesterov(1.0, 0.4, 1.0),
        generalized_nesterov(1.0, 0.6, 1.0),
    ]

ks = [1, 2, 10, 100, 1000]
print("theta_k at k =", ks)
for s in schedules:
    print(f"  {s.name:28s}", " ".join(f"{s.theta(k):.4f}" for k in ks))

# Chambolle-Dossal weights are the generalized Nesterov ones with a = 1/(alpha-1)
cd, gn = chambolle_dossal(4.0), generalized_nesterov(1.0, 1 / 3.0, 1.0)
print("\nCD(4) == GN(1, 1/3, 1) for k <= 1e4:",
      all(cd.theta(k) == gn.theta(k) for k in range(1, 10001)))

# Scan each schedule up to k = 1e4
print()
for s in schedules:
    rep = check_momentum_condition(s, 10**4)
    status = ",".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in rep.holds.items())
    print(f"{s.name:28s} {status}  K={rep.K_observed} rho={rep.rho_observed:g}")

# FISTA meets the gap inequality only with equality, hence its item (ii) failure
t = classic_nesterov().t_array(10)
print("\nFISTA t_k(t_k - 1) - t_{k-1}^2:", np.round(t[1:] * (t[1:] - 1) - t[:-1] ** 2, 14))

# omega > 1: the gap d_k = t_{k-1}^2 - t_k (t_k - 1) runs off to minus infinity
for omega in (1.5, 2.0):
    d = super_linear_divergence(omega, 1.0, 0.0, 10**5)
    print(f"omega={omega}: d_100={d[99]:.4g}  d_1e4={d[9999]:.4g}  d_1e5={d[-1]:.4g}")
