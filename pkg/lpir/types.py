"""Defines helpful types and values for the library."""

##############################################################################
# Python imports.
from enum import Enum


##############################################################################
class LPIRError(Exception):
    """Base exception of all exceptions in the library."""


##############################################################################
class InvalidParameters(LPIRError, ValueError):
    """Type of an exception raised when given values are out of range."""


##############################################################################
class InfeasibleCost(InvalidParameters):
    """Type of an exception raised for a download cost that can't be met."""


##############################################################################
class GuardExceeded(LPIRError):
    """Type of an exception raised when an enumeration would be too big."""


##############################################################################
class DecodeError(LPIRError):
    """Type of an exception raised when answers don't match the key."""


##############################################################################
class LPError(LPIRError):
    """Base exception for linear program solver outcomes."""


##############################################################################
class Infeasible(LPError):
    """The linear program has no feasible point."""


##############################################################################
class Unbounded(LPError):
    """The linear program's objective is unbounded below."""


##############################################################################
class IterationLimit(LPError):
    """The solver ran out of pivots before reaching an optimum."""


##############################################################################
class NumericalBreakdown(LPError):
    """The solver's tableau picked up a value that isn't finite."""


##############################################################################
class PermutationScope(Enum):
    """The set of server permutations a key may use."""

    CYCLIC = "cyclic"
    """Only the N cyclic shifts of the servers."""

    ALL = "all"
    """Every one of the N! bijections."""

    @classmethod
    def parse(cls, value: "str | PermutationScope") -> "PermutationScope":
        """Turn a scope name into a scope.

        Args:
            value: The name of the scope, or a scope.

        Returns:
            The scope.

        Raises:
            InvalidParameters: If the name isn't a known scope.
        """
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as error:
            raise InvalidParameters(
                f"Unknown permutation scope: {value!r} (expected cyclic or all)"
            ) from error

    @property
    def is_cyclic(self) -> bool:
        """Is this the cyclic-only scope?"""
        return self is PermutationScope.CYCLIC


### types.py ends here
