"""Numerical laboratory for sprays on truncated function and sequence spaces."""
from .cone import (ConeVerdict, QuotientSchedule, Verdict, adjacent_member, admissible,
                   first_order_tangent_on_bundle, second_order_member)
from .invariance import (InvarianceReport, Overall, check_flow_invariance,
                         check_geodesic_convexity, check_orbit_invariance,
                         check_stratification, check_tangency_reformulation,
                         check_totally_geodesic, sign_change_events, verify_invariance)
from .model_space import GridFunctions, GridSeminorm, Product, Sequences, metric, seminorm
from .profiles import bump
from .samplers import AdmissibleSampler, SamplerMode
from .sets import (circle_grid, constant_functions, finite_sequence_strata, fourier_subspace,
                   great_circle_constant_loops, half_support_union, nonneg_orthant,
                   parabola_graph, translate_set)
from .spray import (Spray, Trajectory, bump_perturbed_spray, check_automorphism,
                    check_homogeneity, flat_spray, geodesic_flow, integrate_geodesic,
                    projective_transform, pushforward_spray, sphere_pointwise_spray,
                    translation)

__version__ = "0.1.0"
