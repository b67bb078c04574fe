# %% [markdown]
# # Success probability against channel entanglement
#
# Sweep alpha^2 from 0.5 (maximally entangled) to 1 (product state) and
# compare sampled success rates with the straight line 2 beta^2.

# %%
import numpy as np

from conclusive_teleport import sweep_alpha

N_TRIALS = 20_000
grid = np.round(np.linspace(0.5, 1.0, 11), 10)
rows = sweep_alpha(grid, n_trials=N_TRIALS, seed=42)

print(f"{'alpha^2':>8} {'analytic':>9} {'sampled':>9} {'z':>6}")
for r in rows:
    z = (r.empirical_success - r.analytic_success) / r.std_err if r.std_err > 0 else 0.0
    print(f"{r.alpha_sq:8.2f} {r.analytic_success:9.4f} {r.empirical_success:9.4f} {z:6.2f}")

# %% [markdown]
# A crude text plot: one '#' per 2% success.

# %%
for r in rows:
    print(f"{r.alpha_sq:4.2f} |" + "#" * int(round(50 * r.empirical_success)))
