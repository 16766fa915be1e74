"""
Predicting the unstable peaks
=============================

The asymptotic theory turns (dz, T) into integer pairs (n_sum, n_diff)
that label coupled modes at omega_pi -/+ Omega.  This script walks
through the numbers for a wide window and shows how sensitive the
answer is to T.
"""

import math

from ssfm_stability import SolitonSpec, build_grid, predict_soliton_instability, resonance_info
from ssfm_stability.theory import (
    _first_term,
    _n_diff_estimate,
    closest_negative_sum,
    instability_interval,
    max_increment,
)

sol = SolitonSpec()
T = 128 * math.pi
grid = build_grid(T, 4096)
res = resonance_info(-1.0, 0.0043, grid)

# %%
# The Omega-independent part of X, and the spacing 2 pi / eps that
# n_sum adds to it.
first = _first_term(sol.K(-1.0), -1.0, T, res)
n_sum = closest_negative_sum(sol, -1.0, T, res)
print(f"omega_pi={res.omega_pi:.3f}, fractional offset={res.delta_omega_pi:.4f}")
print(f"first term={first:.2f}, 2pi/eps={2 * math.pi / res.epsilon:.2f}, n_sum={n_sum}")
print(f"n_diff estimate={_n_diff_estimate(first, n_sum, T, res):.2f}")

# %%
# Only pairs whose X lands inside the instability interval grow.
for p in predict_soliton_instability(sol, -1.0, 2.0, T, res):
    lo, hi = instability_interval(p.Omega, sol, -1.0, 2.0)
    print(
        f"({p.n_sum}, {p.n_diff}) Omega={p.Omega:.3f} X={p.X:.2f} in ({lo:.2f}, {hi:.2f}) "
        f"rate={p.increment:.4f} [{p.rank}]"
    )
print(f"upper bound on any rate at this T: {max_increment(sol, 2.0, T):.4f}")

# %%
# A change of T well under one percent reshuffles the prediction.
for T_i in (397.0, 398.0, 399.0, 400.0, T):
    r = resonance_info(-1.0, 0.0043, build_grid(T_i, 4096))
    preds = predict_soliton_instability(sol, -1.0, 2.0, T_i, r)
    top = preds[0] if preds else None
    desc = f"Omega={top.Omega:.3f} rate={top.increment:.4f}" if top else "stable"
    print(f"T={T_i:8.3f}: {desc}")
