"""Exception hierarchy shared by the library and the command-line front end."""


class OpSizeError(Exception):
    """Base class for all package errors."""


class SpecError(OpSizeError, ValueError):
    """Invalid model specification or parameter domain."""


class ResourceError(OpSizeError):
    """Requested problem size exceeds a configured cap."""


class IntegrationError(OpSizeError):
    """Adaptive integration failed to meet its tolerance."""


class NumericalError(OpSizeError):
    """A dense linear-algebra routine failed.

    The offending matrix is kept on ``matrix`` for post-mortem inspection.
    """

    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class PhaseError(SpecError):
    """Formula requested outside the coupling phase where it is valid."""
