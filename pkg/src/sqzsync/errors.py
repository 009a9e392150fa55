"""Exception hierarchy.

``ParameterError`` subclasses map to CLI exit code 1, ``NumericalError``
subclasses to exit code 2.
"""


class SqzSyncError(Exception):
    pass


class ParameterError(SqzSyncError, ValueError):
    pass


class NumericalError(SqzSyncError, ArithmeticError):
    pass


class InvalidParam(ParameterError):
    def __init__(self, field: str, value, reason: str):
        self.field = field
        self.value = value
        self.reason = reason
        super().__init__(f"invalid {field}={value!r}: {reason}")


class BlochNormExceeded(ParameterError):
    pass


class NotADensityMatrix(ParameterError):
    pass


class StepTooLarge(ParameterError):
    pass


class SingularGenerator(NumericalError):
    pass


class DegenerateDenominator(NumericalError):
    pass


class PoleSingularity(NumericalError):
    pass


class NoMaximumFound(NumericalError):
    pass
