"""
Checking the theory against the linearised step
================================================

The one-step map linearised about the soliton is a dense real-linear
operator.  Its eigenvalues give growth rates without any asymptotics, and
its eigenvectors show where in frequency the unstable modes live.
"""

import math

import numpy as np

from ssfm_stability import SolitonSpec, build_grid, predict_soliton_instability, resonance_info
from ssfm_stability.floquet import build_linear_map, floquet_increments

grid = build_grid(32 * math.pi, 1024)
sol = SolitonSpec()

for dz in (0.0030, 0.0040, 0.0048, 0.0050):
    res = resonance_info(-1.0, dz, grid)
    fr = floquet_increments(build_linear_map(sol, -1.0, 2.0, dz, grid), grid)
    preds = predict_soliton_instability(sol, -1.0, 2.0, grid.T, res)
    theory = preds[0].increment if preds else 0.0
    line = f"dz={dz}: oracle {max(fr.top_increment, 0.0):.4f}, theory {theory:.4f}"
    if fr.unstable().size:
        lo, hi = fr.sidebands[0]
        line += f", sidebands omega_pi {lo - res.omega_pi:+.3f} / {hi - res.omega_pi:+.3f}"
        line += f", resonant mass {fr.resonant_fraction[0]:.3f}"
    print(line)

# %%
# Spectral mass of the leading unstable mode at dz=0.0048, near omega_pi.
res = resonance_info(-1.0, 0.0048, grid)
fr = floquet_increments(build_linear_map(sol, -1.0, 2.0, 0.0048, grid), grid, n_modes=1)
sel = np.abs(grid.omega - res.omega_pi) < 1.0
for w, m in zip(grid.omega[sel], fr.mass[0, sel]):
    print(f"{w - res.omega_pi:+.3f} {'#' * int(200 * m)}")
