"""Exception hierarchy shared by all modules."""


class NLGaugeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(NLGaugeError):
    """Bad input: malformed expression, config, or violated precondition."""


class ExpressionSyntaxError(ValidationError):
    def __init__(self, message, offset=None, text=None):
        self.offset = offset
        self.text = text
        if offset is not None:
            message = f"{message} at offset {offset}"
        super().__init__(message)


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class ArityError(ExpressionSyntaxError):
    pass


class DomainError(NLGaugeError):
    """An expression was evaluated outside the domain of one of its functions."""


class SingularGaugeError(ValidationError):
    """The determinant of a gauge element vanished (or fell below threshold)."""


class WindingError(ValidationError):
    """A transformation or term would give T (or a field) a non-periodic part."""


class DegenerateEquationError(ValidationError):
    """Equation coefficients make a requested quantity undefined (e.g. nu1 = 0)."""


class FamilyError(ValidationError):
    """Coefficients fall outside the sub-family an operation requires."""


class NumericalError(NLGaugeError):
    """Integrator blew up or produced non-finite values."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
