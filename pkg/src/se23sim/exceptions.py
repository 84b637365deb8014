"""Exception types shared across the package."""


class Se23Error(Exception):
    """Base class for all package errors."""


class NotInAlgebra(Se23Error):
    """Matrix violates the se_2(3) sparsity/skewness pattern beyond tolerance."""


class NearSingularity(Se23Error):
    """Rotation angle too close to pi for the log map or inverse Jacobians."""


class OriginSingularity(Se23Error):
    """Position inside the gravity guard radius."""


class DomainError(Se23Error, ValueError):
    """Inputs outside the mathematical domain of an operation."""


class StepSizeUnderflow(Se23Error):
    """Adaptive integrator cannot meet the tolerance above min_dt."""


class GainSynthesisFailure(Se23Error):
    """Feedback gain failed the closed-loop eigenvalue verification."""


class BoundViolation(Se23Error):
    """Measured gravity mismatch exceeded the Proposition-style bound."""


class IoError(Se23Error):
    """Artifact input/output problem (missing or empty run artifacts)."""
