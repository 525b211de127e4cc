"""Exception types shared across the package.

The CLI maps these onto exit codes: config errors exit 2, model execution
failures exit 3, numeric/statistical failures exit 4.
"""


class PickFreezeError(Exception):
    """Base class for all package errors."""


class ParameterError(PickFreezeError, ValueError):
    """A distribution or operation parameter is outside its domain."""


class NoSolutionError(PickFreezeError):
    """A root search could not satisfy its constraint within the bracket."""


class InsufficientSampleError(PickFreezeError):
    """Too few blocks/samples for the requested estimator."""


class DegenerateOutputError(PickFreezeError):
    """Output variance is zero where a ratio was requested."""


class OrderLimitError(PickFreezeError):
    """Replicate order p exceeds the supported bound."""


class PartitionError(PickFreezeError):
    """Conditional-CDF partitioning produced an empty bin."""


class QuadratureError(PickFreezeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ModelEvalError(PickFreezeError):
    """Model evaluation failed; carries the block/replicate location."""

    def __init__(self, message, block=None, replicate=None):
        super().__init__(message)
        self.block = block
        self.replicate = replicate


class ModelTimeoutError(ModelEvalError):
    """An external model run exceeded its timeout."""


class ProtocolError(PickFreezeError):
    """An external model's output file violates the exchange protocol."""


class OutputParseError(ProtocolError):
    """A cell in an external output file is not numeric."""


class ConfigError(PickFreezeError):
    """A study configuration file failed validation."""
