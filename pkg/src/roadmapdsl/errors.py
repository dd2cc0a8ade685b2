"""Exception hierarchy shared across the package.

Spans are byte offsets (start, end) into the source text that produced the
error, when one is available.
"""

from __future__ import annotations


class RoadmapError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, span: tuple[int, int] | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        if self.span is not None:
            return f"{self.message} (at {self.span[0]}..{self.span[1]})"
        return self.message


class ExprSyntaxError(RoadmapError):
    """Raised by the expression lexer/parser; carries the expected-token set."""

    def __init__(self, message, span=None, expected=()):
        super().__init__(message, span)
        self.expected = tuple(expected)


class ModelSyntaxError(RoadmapError):
    """Raised by the model-file parser."""


class ValidationError(RoadmapError):
    """Structural model problems: duplicate names, bad implements targets, cycles."""


class ResolveError(RoadmapError):
    """An identifier path could not be bound to a model element."""


class TypeCheckError(RoadmapError):
    """Static type mismatch; ``other_span`` points at the second offender."""

    def __init__(self, message, span=None, other_span=None):
        super().__init__(message, span)
        self.other_span = other_span


class EvalTypeError(RoadmapError):
    """A value-level operation was applied to operands it is not defined for."""
