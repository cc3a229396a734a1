"""Exception hierarchy shared by all fusetrack modules.

The CLI maps these onto exit codes: schema/validation problems exit 2,
tag/object count mismatches exit 3, numerical failures exit 4.
"""


class FusetrackError(Exception):
    """Base class for all fusetrack errors."""


class ValidationError(FusetrackError):
    """A domain object violates one of its invariants."""


class NonMonotoneTimeError(ValidationError):
    pass


class MixedFramesError(ValidationError):
    pass


class EmptyTrajectoryError(ValidationError):
    pass


class SchemaError(FusetrackError):
    """An input file does not match its documented schema."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CountMismatchError(FusetrackError):
    """Tag and object counts differ; association requires equal counts."""


class NumericalError(FusetrackError):
    """A numerical operation failed (singular system, lost definiteness, ...)."""


class SingularKernelError(NumericalError):
    pass


class OriginSingularityError(NumericalError):
    pass


class SingularInnovationError(NumericalError):
    pass


class SingularCovarianceError(NumericalError):
    pass


class SingularSigmaError(NumericalError):
    pass


class InsufficientSamplesError(NumericalError):
    pass


class LengthMismatchError(NumericalError):
    pass


class NoOverlapError(NumericalError):
    pass


class InsufficientSupportError(NumericalError):
    pass


class OutOfGridError(FusetrackError):
    pass


class ZeroDisparityError(NumericalError):
    pass
