"""Moran sets: exact counts, the cylinder formula and the separating schedules.

For a constant ratio r every estimate equals log 2 / log(1/r).  The two
example schedules alternate fast blocks (ratio 2**-alpha) with halving
blocks so that different dimension functions see different exponents.
"""

import math

from phidim.dimfunc import constant_df, inverse_sqrt_log_df, rate_window
from phidim.estimator import ScaleGrid, checkpoint_grid, phi_lower_estimate
from phidim.moran import constant_spec, example1_spec, example2_spec, formula_dimension, level_set

cantor = constant_spec(1 / 3)
print("Cantor level 2 cylinders:", level_set(cantor, 2).count)
rep = formula_dimension(cantor, constant_df(1.0), n_max=60)
print(f"formula value {rep.value:.6f} vs log2/log3 = {math.log(2) / math.log(3):.6f}")
est = phi_lower_estimate(cantor, constant_df(1.0), ScaleGrid.geometric(10, 30, gamma=1 / 3))
print(f"ball-count estimate {est.value:.4f}")

# phi = 1/2 against psi = 1: the phi quotient sits at 1/alpha at each checkpoint
alpha = 2.0
phi, psi = constant_df(0.5), constant_df(1.0)
spec = example1_spec(alpha, phi, psi, n_checkpoints=5)
cps = spec.meta["checkpoints_t"]
print("\nfirst schedule, checkpoints at t =", [round(t, 1) for t in cps])
print("  phi quotients:", formula_dimension(spec, phi).values_at(cps[1:]).round(4))
print("  psi quotients:", formula_dimension(spec, psi).values_at(cps[1:]).round(4))

# second schedule: phi and 3phi/2 differ at every checkpoint
phi = inverse_sqrt_log_df()
spec = example2_spec(alpha, phi, n_checkpoints=5)
cps = spec.meta["checkpoints_t"][1:]
print("\nsecond schedule")
print("  phi quotients:     ", formula_dimension(spec, phi).values_at(cps).round(4))
print("  3phi/2 quotients:  ", formula_dimension(spec, rate_window(phi, 2 / 3)).values_at(cps).round(4))
est = phi_lower_estimate(spec, phi, checkpoint_grid(spec, first=1))
print("  exact ball counts: ", est.quotients.round(4))
