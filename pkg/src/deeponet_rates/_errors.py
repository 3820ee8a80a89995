"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to, so the command-line driver
can translate failures without a lookup table.
"""


class DeepONetRatesError(Exception):
    exit_code = 1


class ValidationError(DeepONetRatesError, ValueError):
    """A precondition on user input was violated."""

    exit_code = 3


class DomainError(ValidationError):
    """A point lies outside the domain an object is defined on."""


class InputError(ValidationError):
    """Malformed or inconsistent input data."""


class ParameterError(ValidationError):
    """A scalar parameter is out of its admissible range."""


class NumericalError(DeepONetRatesError, ArithmeticError):
    exit_code = 4


class EvaluationError(NumericalError):
    """A non-finite value or range violation appeared during evaluation."""


class SingularUpdateError(NumericalError):
    """A rank-one update denominator fell below the floor."""

    def __init__(self, k, value, floor):
        self.k = k
        self.value = value
        self.floor = floor
        super().__init__(
            f"singular rank-one update at step k={k}: |1 + alpha v^T T u| = "
            f"{abs(value):.3e} < floor {floor:.1e}"
        )
