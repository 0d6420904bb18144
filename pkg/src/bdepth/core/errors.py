"""Exception hierarchy for bdepth.

Every error raised on purpose by the library derives from ``BdepthError``.
Errors that describe a bad argument also derive from ``ValueError`` so that
callers catching builtins keep working.
"""

from __future__ import annotations

from typing import Any


class BdepthError(Exception):
    """Base class for all bdepth errors."""

    def details(self) -> dict[str, Any]:
        """Machine-readable payload for failure records."""
        return {}


# ---------------------------------------------------------------------------
# Novikov arithmetic
# ---------------------------------------------------------------------------


class NovikovError(BdepthError):
    """Arithmetic failure in the Novikov field."""


class CutoffAmbiguous(NovikovError):
    """Valuation requested on an element with no terms but a finite cutoff."""


class NovikovDivisionByZero(NovikovError, ZeroDivisionError):
    """Inversion of the zero element."""


class GroupMismatch(NovikovError, ValueError):
    """Operands live over different exponent groups."""


class ExponentOutsideGroup(NovikovError, ValueError):
    """An exponent is not a member of the declared exponent group."""


class UnboundedInverse(NovikovError):
    """The inverse is an infinite series and no cutoff was given."""


# ---------------------------------------------------------------------------
# Filtered complexes
# ---------------------------------------------------------------------------


class ComplexError(BdepthError):
    """Structural failure of a filtered complex, map or basis."""


class InvariantViolation(ComplexError):
    """A checked invariant does not hold; ``entry`` names the offender."""

    def __init__(self, message: str, entry: Any = None) -> None:
        super().__init__(message)
        self.entry = entry

    def details(self) -> dict[str, Any]:
        return {"entry": _jsonable(self.entry)}


class NotOrthogonal(ComplexError):
    """A family of chains fails the orthogonality criterion."""

    def __init__(self, message: str, certificate: Any = None) -> None:
        super().__init__(message)
        self.certificate = certificate

    def details(self) -> dict[str, Any]:
        return {"certificate": _jsonable(self.certificate)}


class NotIndependent(ComplexError, ValueError):
    """A family of chains is linearly dependent."""


class ZeroMap(ComplexError):
    """A witness was requested for the zero map."""


class NotASupergroup(ComplexError, ValueError):
    """Coefficient extension target does not contain the source group."""


class NotEquivariant(ComplexError):
    """A grading relabeling or shift does not commute with the successor."""


class NotFiltrationIso(ComplexError):
    """A per-grading matrix is not a filtration isomorphism."""


class HomotopyIdentityFails(ComplexError):
    """A declared chain homotopy does not satisfy its identity."""


class ShiftExceeded(ComplexError):
    """A filtered map raises some generator's level by more than its shift."""

    def __init__(self, message: str, generator: str | None = None) -> None:
        super().__init__(message)
        self.generator = generator

    def details(self) -> dict[str, Any]:
        return {"generator": self.generator}


class GapViolated(ComplexError):
    """A quantum-correction entry has valuation below the declared gap."""

    def __init__(self, message: str, entry: Any = None, required: Any = None,
                 actual: Any = None) -> None:
        super().__init__(message)
        self.entry = entry
        self.required = required
        self.actual = actual

    def details(self) -> dict[str, Any]:
        return {
            "entry": _jsonable(self.entry),
            "required": _jsonable(self.required),
            "actual": _jsonable(self.actual),
        }


class SignRuleUnavailable(ComplexError):
    """A tensor product needs a parity or a characteristic-two field."""


class TruncationUnstable(ComplexError):
    """Gaps kept changing under cutoff doubling."""


# ---------------------------------------------------------------------------
# Numerics
# ---------------------------------------------------------------------------


class NumericsError(BdepthError):
    """Failure in the floating-point lab."""


class OutOfRange(NumericsError, ValueError):
    """A spectral parameter lies outside its admissible range."""


class StepTooLarge(NumericsError):
    """Richardson step-halving disagreement exceeds tolerance."""


class NotSymmetric(NumericsError, ValueError):
    """A sample that must be symmetric is not."""


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------


class ParseError(BdepthError, ValueError):
    """Malformed input file or literal; positions are 1-based."""

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None) -> None:
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.message = message
        self.line = line
        self.column = column

    def details(self) -> dict[str, Any]:
        return {"line": self.line, "column": self.column}


def _jsonable(value: Any) -> Any:
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value if value == value and abs(value) != float("inf") else str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return str(value)
