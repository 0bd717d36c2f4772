"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside the domain an operation accepts."""


class InitializationError(ValueError):
    """Measurements cannot support an initializer or step-size estimate."""


class SingularSystemError(ArithmeticError):
    """A Gauss-Newton normal-equation matrix failed to factor.

    ``pivot`` is the zero-based index of the leading minor that was not
    positive definite.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot
