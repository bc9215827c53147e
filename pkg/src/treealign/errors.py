"""Exception types raised by treealign."""

from typing import Optional


class TreeAlignError(ValueError):
    """Base class for data errors (CLI exit code 1)."""


class BracketParseError(TreeAlignError):
    """Malformed bracketed parse."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at character {offset})"
        super().__init__(message)


class TreeValidationError(TreeAlignError):
    """A segment tree violates the relaxed segment tree conditions."""

    def __init__(self, violations: list, context: str = ""):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        more = f" (+{len(self.violations) - 3} more)" if len(self.violations) > 3 else ""
        prefix = f"{context}: " if context else ""
        super().__init__(f"{prefix}invalid segment tree: {head}{more}")


class BoundaryError(TreeAlignError):
    """Word boundaries or word spans that cannot be used as given."""


class CorpusError(TreeAlignError):
    """Gold and predicted corpora cannot be paired or scored."""


class OracleSizeError(TreeAlignError):
    """Exhaustive alignment requested on trees that are too large."""
