"""Building dimension functions from checkpoints.

Two checkpoints (R, theta) = (e^-1, 1) and (e^-4, 1/2) admit a whole
family of dimension functions through them.  The max and min
interpolants bracket every member; a function that grows with R (such as
R itself) breaks the growth axiom.
"""

import math

import numpy as np

from phidim.dimfunc import (CheckpointSequence, check_axioms, doubling_bound_check,
                            inverse_sqrt_log_df, max_interpolant, min_interpolant, rate_window)

pts = CheckpointSequence.from_logs([1.0, 4.0], [1.0, 0.5])
hi, lo = max_interpolant(pts), min_interpolant(pts)

print("t = log(1/R)   max      min")
for t in (1.0, 1.5, 2.0, 3.0, 4.0, 6.0):
    print(f"{t:12.2f}  {hi.at_log(t):.4f}  {lo.at_log(t):.4f}")

t = np.linspace(1.0, 12.0, 200)
print("\naxioms on a 200-point grid: max", check_axioms(hi, t=t).passed,
      "min", check_axioms(lo, t=t).passed)
bad = check_axioms(lambda R: R, grid=np.exp(-t))
print(f"phi(R) = R: monotone {bad.monotone.all()}, growth fails on {(~bad.growth).sum()} of "
      f"{bad.growth.size} adjacent pairs")

# the default function for the example schedules decays like 1/sqrt(log(1/R))
phi = inverse_sqrt_log_df()
for t in (10.0, 1e3, 1e5):
    print(f"inv-sqrt-log at t = {t:g}: {phi.at_log(t):.5f}  (1/sqrt(t) = {1 / math.sqrt(t):.5f})")

# rate windows divide phi; the doubling sandwich holds for any C in (0, 1)
w = rate_window(phi, 0.25)
print("phi/0.25 at t = 100:", w.at_log(100.0))
print("doubling sandwich, C = 1/4:", doubling_bound_check(phi, 0.25, t=np.geomspace(1, 1e6, 60)).passed)
