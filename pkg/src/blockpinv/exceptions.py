"""Exception hierarchy.

Input problems (bad shapes, non-Hermitian or indefinite weights handed in by
the caller) raise :class:`ValidationError`. Failures that happen while a
representation is being evaluated raise :class:`NumericalError`, tagged with
the stage that broke.
"""


class BlockPinvError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BlockPinvError, ValueError):
    """An input failed validation.

    ``field`` names the offending argument or file entry when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NotPositiveDefiniteError(ValidationError):
    """A matrix expected to be Hermitian positive definite is not."""


class NumericalError(BlockPinvError, ArithmeticError):
    """A computation failed in floating point (PD loss, conditioning, ...)."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class PreconditionError(NumericalError, ValueError):
    """A representation's hypotheses do not hold for the given input.

    ``residuals`` maps each violated condition to its measured residual.
    """

    def __init__(self, message, residuals=None, stage=None):
        super().__init__(message, stage=stage)
        self.residuals = dict(residuals or {})


class IllConditionedWarning(RuntimeWarning):
    """An operator that is invertible in exact arithmetic is badly conditioned."""
