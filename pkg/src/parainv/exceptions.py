"""Exception hierarchy for parainv."""


class ParainvError(Exception):
    """Base class for all library errors."""


class ValidationError(ParainvError, ValueError):
    """Input data violates a documented contract."""


class InvalidMeshError(ValidationError):
    pass


class DomainError(ValidationError):
    """A time argument lies outside the interval of the form."""


class GeometryMismatchError(ValidationError):
    """A pointwise convex set was paired with a non-diagonal H-Gram matrix."""


class GridError(ValidationError):
    pass


class NotEllipticError(ParainvError):
    pass


class StepFailureError(ParainvError):
    def __init__(self, step, message="singular step matrix"):
        self.step = step
        super().__init__(f"{message} at step {step}")


class ContractionFailureError(ParainvError):
    """Picard iteration stopped contracting; slabs are too long."""


class PreconditionError(ParainvError):
    pass


class InvarianceViolationError(ParainvError):
    """A solution that should stay in the convex set left it."""

    def __init__(self, step, violation, message=None):
        self.step = step
        self.violation = violation
        super().__init__(
            message
            or f"post-hoc invariance violation {violation:.3e} at step {step}"
        )
