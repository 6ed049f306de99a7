"""Exception hierarchy shared by every presqe module."""

from __future__ import annotations

from dataclasses import dataclass


class PresqeError(Exception):
    """Base class for all errors raised by presqe."""


@dataclass(frozen=True)
class SourceSpan:
    """Half-open byte range ``[start, end)`` into the parsed source."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("span start must not exceed span end")


class ParseError(PresqeError):
    def __init__(self, message: str, span: SourceSpan | None = None):
        self.span = span
        if span is not None:
            message = f"{message} at bytes {span.start}..{span.end}"
        super().__init__(message)


class UnboundVariableError(ParseError):
    pass


class ModulusError(ParseError):
    pass


class ResourceLimitError(PresqeError):
    """A configurable size cap was exceeded; ``estimate`` carries the offending count."""

    def __init__(self, message: str, estimate: int | None = None):
        self.estimate = estimate
        super().__init__(message)


class PreconditionError(PresqeError, ValueError):
    pass


class SingularMatrixError(PresqeError, ArithmeticError):
    pass


class NoIntegralSolutionError(PresqeError):
    pass


class NotInConeError(PresqeError):
    pass


class InvariantError(PresqeError, AssertionError):
    """An internal consistency check failed (a bug, not a user error)."""


class ShapeError(PresqeError, ValueError):
    pass
