"""Exception types shared across the package."""


class TTOptError(Exception):
    """Base class for all errors raised by this package."""


class SingularMatrix(TTOptError, ArithmeticError):
    """A pivot or diagonal entry fell below the numerical tolerance."""


class IterationLimitWarning(RuntimeWarning):
    """maxvol stopped at ``max_iters`` before reaching the ``eps`` bound."""


class IndexOutOfRange(TTOptError, IndexError):
    pass


class DigitOutOfRange(TTOptError, ValueError):
    pass


class NotQuantized(TTOptError, ValueError):
    pass


class DomainError(TTOptError, ValueError):
    """A point lies outside the box a benchmark function is defined on."""


class UnknownBenchmark(TTOptError, KeyError):
    def __str__(self):
        # KeyError would repr() the message
        return str(self.args[0]) if self.args else ""


class BudgetExhausted(TTOptError):
    """Raised when an evaluation is requested after the budget is spent."""


class ObjectiveError(TTOptError):
    """The objective returned non-finite values.

    The partial :class:`~ttopt.optimizer.OptResult` collected before the
    failure is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
