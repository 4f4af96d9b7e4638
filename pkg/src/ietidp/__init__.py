"""IETI-DP (dual-primal isogeometric tearing and interconnecting) for 2D Poisson
on multi-patch spline domains."""

from .geometry import (MultiPatchDomain, Interface, NurbsPatchMap, build_ring, build_yeti,
                       build_unit_square_grid, domain_from_quads, load_domain, save_domain,
                       parse_domain, serialize_domain, validate_matching)
from .ieti import (ALGORITHMS, SolveReport, IetiNonConvergence, setup, solve,
                   solve_global_oracle, relative_energy_error)

__version__ = "0.1.0"
