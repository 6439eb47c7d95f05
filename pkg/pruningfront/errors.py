from __future__ import annotations

import sys
from typing import Any
from typing import Dict

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self


class PruningFrontError(ValueError):
    """Base class of every domain error raised by `pruningfront`.

    Keyword arguments passed to the constructor are kept in `payload` and end up in the machine readable error object
    printed by the CLI.

    Arguments:
        msg: Human readable message.
        **payload: Structured details of the failure (indices, depths, positions, ...).
    """

    def __init__(self: Self, msg: str, **payload: Any) -> None:
        super().__init__(msg)
        self.payload = payload

    def to_dict(self: Self) -> Dict[str, Any]:
        """Returns the error as a JSON serialisable dictionary."""
        return {"error": self.__class__.__name__, "message": str(self), **self.payload}


class ParseError(PruningFrontError):
    """A word, window or pattern text does not follow the grammar; `payload["position"]` is the offending column."""


class FormatVersionError(PruningFrontError):
    """A serialized artifact has a missing or unsupported `format_version`."""


class InsufficientWindowError(PruningFrontError):
    """The stored symbols (or marks) do not reach the coordinate an operation needs."""


class InsufficientDepthError(PruningFrontError):
    """Kneading tails (or tree levels) are too short for the requested construction."""


class InvalidArcCodeError(PruningFrontError):
    """A nonempty arc-code does not start with `-` or contains `~`."""


class DuplicateArcCodeError(PruningFrontError):
    """Two kneading sequences share an arc-code."""


class MissingRootError(PruningFrontError):
    """No kneading sequence has the empty arc-code."""


class BadFirstSymbolError(PruningFrontError):
    """The sequence handed to the W^u admissibility test does not start with `-`."""


class SearchBudgetExceededError(PruningFrontError):
    """The prelude search of the admissibility test would exceed its candidate budget."""


class MalformedPatternError(PruningFrontError):
    """A folding pattern violates its structural rules."""


class ShapeViolationError(PruningFrontError):
    """A (naked) pruned tree violates the level, parity or child count rules."""


class NotMisiurewiczError(PruningFrontError):
    """Lozi parameters outside the Misiurewicz set."""


class BudgetExceededError(PruningFrontError):
    """A polyline grew beyond its vertex or generation budget."""


class UnstableEigenvalueMissingError(PruningFrontError):
    """The fixed point has no eigenvalue of modulus larger than one."""


class NoCandidatesError(PruningFrontError):
    """The critical point scan found nothing below the score threshold."""


class OrderingAmbiguousError(PruningFrontError):
    """Two critical candidates cannot be ordered vertically at the configured resolution."""


class LocusAmbiguousError(PruningFrontError):
    """An iterate fell inside the dead zone around the critical locus while strict symbols were required."""


class WindowTooDeepError(PruningFrontError):
    """Region inversion exceeded its depth or polygon vertex budget."""
