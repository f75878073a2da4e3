"""Generalized lower Assouad dimensions on Moran sets and popcorn graphs."""

__version__ = "0.1.0"

from .covering import (BoxUnion, CountBounds, PointCloud, covering_number, interval,  # noqa: E402
                       packing_number)
from .dimfunc import (CheckpointSequence, DimensionFunction, check_axioms,  # noqa: E402
                      constant_df, inverse_sqrt_log_df, max_interpolant, min_interpolant,
                      rate_window)
from .estimator import (ScaleGrid, phi_lower_estimate, quasi_phi_lower_estimate,  # noqa: E402
                        windowed_lower_estimate)
from .moran import (MoranSpec, constant_spec, example1_spec, example2_spec,  # noqa: E402
                    formula_dimension)
from .popcorn import box_dimension_trace, isolated_point_collapse, sample_graph  # noqa: E402
