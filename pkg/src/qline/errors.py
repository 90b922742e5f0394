"""Exception hierarchy shared by all qline modules."""


class QLineError(Exception):
    pass


class DomainError(QLineError, ValueError):
    """An argument lies outside the domain of the operation."""


class ParameterError(QLineError, ValueError):
    """Invalid or degenerate parameters (e.g. a vanishing denominator)."""


class ConvergenceError(QLineError, ArithmeticError):
    """A series or product hit its term cap before the stopping rule fired.

    The truncated value is kept on ``partial`` so callers can inspect it.
    """

    def __init__(self, message, partial=None, terms=None):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


class DivergenceError(QLineError, ArithmeticError):
    """Series argument outside the region where the series converges."""


class PoleError(QLineError, ZeroDivisionError):
    def __init__(self, message, factor_index=None):
        super().__init__(message)
        self.factor_index = factor_index


class WindowError(QLineError, ValueError):
    """Operator application ran out of lattice points."""
