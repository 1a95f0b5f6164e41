"""Geodesic sprays, geodesic invariance and Lie-group reduction of affine connections."""
from .kernels import BACKEND
from .tensor_calc import (
    ChartDomain, Connection, Metric, TensorField, covariant_derivative, fd_derivative, gradient,
    levi_civita, modify_connection, symmetric_product,
)
from .spray import (
    Distribution, SecondOrderField, TangentState, Trajectory, constrained_connection,
    dynamic_invariance_check, forced_spray, geodesic_invariance_test, geodesic_spray, integrate,
    projector_fields, tangent_lift_value, vertical_lift_value,
)
from .frame_bundle import (
    FrameState, FrameVector, adapted_frame_check, association_map, canonical_form, connection_form,
    intrinsic_spray, standard_horizontal_field, transport_frame,
)
from .lie import (
    MatrixLieGroup, PrincipalConnection, SymmetryScenario, curvature_pairing, horizontal_lift,
    infinitesimal_generator, invariance_check, invariant_vertical_field, mechanical_connection,
    so2, so3, split_state, translations, unsplit_state,
)
from .reduction import (
    ReducedField, ReducedState, ReductionEngine, assemble_reduced_field, integrate_reduced,
    verify_reduction,
)
from .expr import Expression, parse_expression
from .scenarios import Scenario, load_scenario

__version__ = "0.1.0"
