class GhzLabError(Exception):
    """Base class for all errors raised by ghz_lab."""


class PreconditionError(GhzLabError, ValueError):
    """An operation was called with inputs outside its contract."""


class DimensionOverflowError(PreconditionError):
    """A tensor product would exceed the three-qubit dimension."""


class NotPSDError(PreconditionError):
    """A matrix expected to be positive semidefinite is not."""


class InvalidParametersError(GhzLabError, ValueError):
    """Channel parameters do not describe a valid Pauli channel."""


class InvalidChannelError(GhzLabError, ValueError):
    """A Kraus set violates the completeness relation."""


class DomainError(GhzLabError, ValueError):
    """A closed form was asked for outside the inputs it is stated for."""


class ChannelSpecError(GhzLabError, ValueError):
    """A textual channel spec could not be parsed.

    Args:
        message: What went wrong.
        text: The spec being parsed.
        position: 0-based column of the offending token, if known.
    """

    def __init__(self, message: str, text: str = "", position: int | None = None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} (at position {position} in {text!r})"
        super().__init__(message)


class NumericalFailureError(GhzLabError, RuntimeError):
    """An eigensolver did not converge or produced an inaccurate result."""


class InternalConsistencyError(GhzLabError, RuntimeError):
    """A structural guarantee of the pipeline was violated."""


class ConfigError(GhzLabError, ValueError):
    """A configuration file line could not be understood."""
