"""Exception hierarchy shared by every module.

Each error carries the CLI exit code it maps to, so the front end never has
to keep a separate lookup table in sync.
"""

from __future__ import annotations


class CycloError(Exception):
    exit_code = 2

    def to_json(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class DomainError(CycloError):
    """Input outside the mathematical domain of the operation."""

    exit_code = 2


class NotSquarefree(DomainError):
    pass


class NotOdd(DomainError):
    pass


class TooLarge(DomainError):
    pass


class NotInvertible(DomainError):
    pass


class LengthMismatch(DomainError):
    pass


class InvalidZeroIndex(DomainError):
    pass


class BudgetError(CycloError):
    exit_code = 3


class DegreeCapExceeded(BudgetError):
    pass


class ScanBudgetExceeded(BudgetError):
    pass


class BudgetExceeded(BudgetError):
    pass


class SearchExhausted(CycloError):
    exit_code = 4
