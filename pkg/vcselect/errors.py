class VcSelectError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(VcSelectError, ValueError):
    pass


class DataValidationError(VcSelectError, ValueError):
    pass


class DecompositionError(VcSelectError, ArithmeticError):
    """A matrix that must be symmetric positive-definite failed Cholesky."""


class SamplerStateError(VcSelectError, RuntimeError):
    """The Gibbs state violated one of its own invariants."""


class SelectionMethodError(VcSelectError, ValueError):
    pass


class MissingArtifactError(VcSelectError, FileNotFoundError):
    pass
