"""Exception hierarchy shared by the library and the CLI.

Every library error carries the process exit code the CLI reports for it.
"""

from fractions import Fraction
from typing import Any, Sequence


class PolyRepError(Exception):
    """Base class for all polyrep errors."""

    exit_code: int = 1


class ParseError(PolyRepError):
    """Input could not be parsed into a polynomial, polyhedron or side description."""

    exit_code = 1


class PreconditionError(PolyRepError):
    """A construction was called outside its hypotheses.

    Args:
        message: Human readable description of the violated hypothesis.
        witness: Optional point at which the violation was observed.
    """

    exit_code = 2

    def __init__(self, message: str, witness: Sequence[Fraction] | None = None):
        super().__init__(message)
        self.witness = tuple(witness) if witness is not None else None


class BudgetExhausted(PolyRepError):
    """A search for an exponent or constant ran past its budget.

    Args:
        message: What was being searched for.
        last_counterexample: Last sample that refuted the largest tried candidate.
        searched: Name of the searched constant.
    """

    exit_code = 3

    def __init__(
        self,
        message: str,
        last_counterexample: Sequence[Fraction] | None = None,
        searched: str | None = None,
    ):
        super().__init__(message)
        self.last_counterexample = tuple(last_counterexample) if last_counterexample is not None else None
        self.searched = searched


class VerificationFailure(PolyRepError):
    """An independent check found a counterexample."""

    exit_code = 4

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report
