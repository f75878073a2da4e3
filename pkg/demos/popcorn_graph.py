"""The popcorn graph at desk scale.

The point above 1/2 is isolated, so its small balls hold a single point
and the phi-lower quotient there is 0.  The baseline segment gives a
value near 1, and the box-counting trace of sample plus baseline climbs
above 1 towards 4/(2+t).
"""

import sys

from phidim.dimfunc import constant_df
from phidim.popcorn import (baseline_trace, box_target, count_reduced, modified_dimension_witness,
                            sample_graph)

t = 1.0
Q = int(sys.argv[1]) if len(sys.argv) > 1 else 600
print(f"t = {t}, Q = {Q}: {count_reduced(Q)} sample points")

w = modified_dimension_witness(sample_graph(t, Q), constant_df(1.0))
c = w.collapse
print(f"isolated point {c.witness}: R = {c.R:.4f}, count {c.count}, quotient {c.quotient}")
print(f"baseline estimate: {w.baseline:.4f}")
base = baseline_trace(w.box.r)
print("   r        sample+baseline   baseline")
for r, v, b in zip(w.box.r, w.box.values, base.values):
    print(f"  {r:.2e}   {v:.4f}            {b:.4f}")
print(f"box target 4/(2+t) = {box_target(t):.4f}; chain 0 < 1 < box holds: {w.chain_holds}")
