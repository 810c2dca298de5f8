"""Approximate fixpoints of lp-contraction maps on the unit cube.

Query the (approximate) lp-centerpoint of the not-yet-excluded region,
discard the bisector halfspace of query and response, repeat: the true
fixpoint always survives, and the search space shrinks geometrically in
the achieved centerpoint quality.  Also ships the exact lp-halfspace
membership kernel, an l1 grid solver whose queries stay on the dyadic
grid, and total-search violation certificates for non-contracting grid
maps.
"""

from .centerpoint import (CenterpointCertificate, DirectionSample,
                          centerpoint_quality, find_centerpoint,
                          push_map_iterate, push_map_step,
                          round_centerpoint_to_grid_l1, tightness_instance)
from .grid import (Grid, GridSolveResult, ViolationCertificate,
                   existence_resolution, min_grid_resolution, solve_grid_l1,
                   verify_violation_certificate)
from .halfspace import (BisectorHalfspace, LimitHalfspace, bisector_contains,
                        limit_contains, limit_contains_bruteforce,
                        subgradient_support)
from .oracles import (ContractionInstance, CountingOracle, make_affine_clamped,
                      make_constant, make_non_contraction,
                      operator_contraction_bound, random_affine_instance,
                      restrict_to_grid)
from .pnorm import PNorm, angle, norm
from .solver import (SearchSpace, SolveParams, SolveReport, banach_iterate,
                     discard_halfspace, residual, solve_continuous,
                     survival_radius, theoretical_query_bound)

__version__ = "0.1.0"
