"""Exception hierarchy shared by every dadsim module."""


class DadsError(Exception):
    """Base class for all errors raised by dadsim."""


class ContractError(DadsError, ValueError):
    """Arguments have the wrong shape or dimension for the model."""


class DomainError(DadsError, ValueError):
    """A numeric argument lies outside its admissible range."""


class ConfigurationError(DadsError, ValueError):
    """A controller or scenario configuration violates a design precondition."""


class ModelError(DadsError, ArithmeticError):
    """A user-supplied model evaluator returned a non-finite value."""


class IntegrationError(DadsError, ArithmeticError):
    """The integrator hit a non-finite right-hand side."""

    def __init__(self, message, time=None, state=None):
        super().__init__(message)
        self.time = time
        self.state = state


class BlowupError(IntegrationError):
    """A state component exceeded the blow-up threshold.

    ``time`` and ``state`` hold the last sample that stayed below the
    threshold.
    """
