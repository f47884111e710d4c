"""
Typed errors raised by the cake engine.

Input faults derive from ValueError as well as CakeError so callers that only
guard against ValueError keep working.
"""

from typing import Any, Optional


class CakeError(Exception):
    """Base class for every error raised by the engine."""


class InvalidPiece(CakeError, ValueError):
    pass


class InvalidValuation(CakeError, ValueError):
    pass


class TauOutOfRange(CakeError, ValueError):
    pass


class BadRange(CakeError, ValueError):
    pass


class Unsatisfiable(CakeError, ValueError):
    """A cut query asked for more value than remains to the right of x."""


class MTooLarge(CakeError, ValueError):
    pass


class EmptyInput(CakeError, ValueError):
    pass


class NotALine(CakeError, ValueError):
    pass


class NotATree(CakeError, ValueError):
    pass


class WrongShape(CakeError, ValueError):
    pass


class BadShapeParams(CakeError, ValueError):
    pass


class IncompleteAllocation(CakeError, ValueError):
    pass


class RoundLimitExceeded(CakeError):
    """A protocol while-loop ran far past its proven round bound."""


class VerificationFailed(CakeError):
    def __init__(self, message: str, report: Optional[Any] = None):
        """
        Args:
            message: Human-readable summary of the failure
            report: The verifier report that failed
        """
        super().__init__(message)
        self.report = report
