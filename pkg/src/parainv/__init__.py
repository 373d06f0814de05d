"""Invariance of closed convex sets for non-autonomous parabolic equations.

Discrete Gelfand triples, theta-scheme and Picard solvers, exact H-projections,
and numerical checks of the margin criterion ``a(t, Pu, u - Pu) >= <f, u - Pu>``
in both the sufficiency and the necessity direction.
"""

from .convex import Ball, Box, ConvexSet, HalfSpace, NonnegCone, whole_space
from .exceptions import (ContractionFailureError, DomainError, GeometryMismatchError,
                         GridError, InvalidMeshError, InvarianceViolationError,
                         NotEllipticError, ParainvError, PreconditionError,
                         StepFailureError, ValidationError)
from .form import (FormConstants, NonAutonomousForm, apply_form, certify_constants,
                   diffusion_form, estimate_constants, matrix_form)
from .invariance import (check_criterion_along, check_pointwise_criterion,
                         distance_monitor, ftc_identity_check, invbound_check)
from .lions import (ThetaStepper, TimeGrid, Trajectory, energy_identity_residual,
                    estimate_solution_norm, l2_h_norm_sq, mr_norm, solve_linear)
from .necessity import (invariance_sampling_test, pointwise_necessity_scan,
                        restart_probe)
from .semilinear import (ContractionPlan, SemilinearRHS, lipschitz_of_clamped,
                         make_plan, scalar_nonlinearity, solve_projected_semilinear,
                         solve_semilinear)
from .space import DiscreteSpace, build_interval_space, matrix_space

__version__ = "0.1.0"
