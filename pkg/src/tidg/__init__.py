"""Plane-strain finite elements for fibre-reinforced elasticity.

Conforming (P1/P2) and interior-penalty discontinuous Galerkin methods for
transversely isotropic linear elasticity, including a selectively
under-integrated variant of the extensional jump penalty that stays
convergent in the near-inextensible regime.
"""

__version__ = "0.1.0"

from .analysis import (AnalyticField, DiscreteField, ErrorReport, H1Error,
                       broken_h1_error, convergence_rates, dg_error, dg_norm,
                       fit_rate, interpolant_properties_check,
                       interpolation_estimate_check, l2_error, linear_field,
                       midpoint_interpolant, vertex_value)
from .assembly import (DEFAULT_STABILIZATION, AdmissibilityReport,
                       LinearSystem, LoadSpec, MethodConfig, PointConstraint,
                       StabilizationParams, assemble, assemble_cg, assemble_dg,
                       check_coercivity_params, dg_norm_gram,
                       numeric_coercivity)
from .bench import (BeamConfig, BeamExactSolution, CookConfig,
                    TipDisplacementRecord, beam_exact_solution, run_beam,
                    run_cook, run_patch, solve_case, write_records_csv)
from .femspace import (FunctionSpace, QuadratureRule, edge_quadrature,
                       element_quadrature, pi0_edge, shape_eval)
from .material import (EngineeringConstants, FiberDirection, MaterialParams,
                       StabilityReport, apply_stress, compliance_matrix,
                       derive_params, derive_params_special, min_eigenvalue,
                       stability_check, voigt_matrix)
from .mesh import EdgeTag, Mesh, classify_edges, cook_mesh, rect_mesh
from .solver import SolveReport, solve
