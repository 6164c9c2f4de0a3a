"""Exception hierarchy shared by every envforge module."""

from __future__ import annotations


class EnvforgeError(Exception):
    """Base class for all library errors."""


# -- expression language -----------------------------------------------------

class ParseError(EnvforgeError):
    """A source string could not be turned into an expression tree.

    ``offset`` is the byte offset into the UTF-8 encoded source.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ExprSyntaxError(ParseError):
    pass


class UnknownIdentifier(ParseError):
    pass


class ArityError(ParseError):
    pass


class DomainError(EnvforgeError):
    """Evaluation left the real domain of an operation.

    ``subexpr`` is the pretty-printed sub-expression that failed.
    """

    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message}: {subexpr}")
        self.subexpr = subexpr


# -- sphere kernel -------------------------------------------------------------

class AntipodalError(EnvforgeError):
    pass


# -- families ------------------------------------------------------------------

class FamilyError(EnvforgeError):
    pass


class DegenerateCurve(FamilyError):
    pass


class VanishingCurvature(FamilyError):
    pass


class UnknownCatalogEntry(FamilyError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return Exception.__str__(self)


# -- creator / envelope ----------------------------------------------------------

class GridTooCoarse(EnvforgeError):
    pass


class FullRank(EnvforgeError):
    """Raised when a creator ambiguity is requested at a regular sample."""


class NotCreative(EnvforgeError):
    pass


class NotApplicable(EnvforgeError):
    pass


class ParallelLines(EnvforgeError):
    pass


# -- optics ----------------------------------------------------------------------

class InadmissiblePoint(EnvforgeError):
    def __init__(self, message: str, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class GrazingNormal(EnvforgeError):
    def __init__(self, message: str, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


# -- scenes ----------------------------------------------------------------------

class SceneError(EnvforgeError):
    """Scene validation failure; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
