"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class FeatPrecError(Exception):
    """Base class. ``line``/``column`` are set when raised while parsing text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.line}:{self.column}: {self.message}"


class SortClash(FeatPrecError):
    pass


class ReservedName(FeatPrecError):
    pass


class DuplicateName(FeatPrecError):
    pass


class UndeclaredSymbol(FeatPrecError):
    pass


class SortMismatch(FeatPrecError):
    pass


class ParseError(FeatPrecError):
    pass


class NotNormalForm(FeatPrecError):
    pass


class ClashPresent(FeatPrecError):
    pass


class NotLinearizable(FeatPrecError):
    pass


class ModelConstructionFailed(FeatPrecError):
    """A clash-free normal form for which no case split yields a model.

    Only reachable with immediate precedence, where the deterministic rules
    are known to be incomplete.
    """


class DuplicateVariable(FeatPrecError):
    pass


class BudgetExceeded(FeatPrecError):
    pass
