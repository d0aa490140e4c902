"""Exception hierarchy shared by the simulator modules."""


class PlatewaveError(Exception):
    """Base class for all errors raised by platewave."""


class InvalidArgumentError(PlatewaveError, ValueError):
    pass


class DegenerateElementError(PlatewaveError, ValueError):
    pass


class NotSPDError(PlatewaveError, ArithmeticError):
    """A factorization met a non-positive pivot."""


class OutOfDomainError(PlatewaveError, ValueError):
    pass


class InsufficientSignalError(PlatewaveError, ValueError):
    pass


class SingularFitError(PlatewaveError, ArithmeticError):
    pass


class NoRootError(PlatewaveError, ArithmeticError):
    pass


class ConfigError(PlatewaveError, ValueError):
    pass
