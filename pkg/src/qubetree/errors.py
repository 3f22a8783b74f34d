from __future__ import annotations


class QubeError(Exception):
    """Base class for all data errors raised by qubetree."""


class DuplicateDimension(QubeError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class EmptyDimensionName(QubeError, ValueError):
    pass


class IncompatiblePath(QubeError, ValueError):
    """Two qubes disagree about the same coordinate path.

    Raised on conflicting payloads, and when one path ends where another
    continues (a leaf cannot also be an interior node).
    """


class MixedTagRange(QubeError, TypeError):
    pass


class QubeSyntaxError(QubeError, ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        loc = f"line {line}" + (f", column {column}" if column else "")
        super().__init__(f"{loc}: {message}" if line else message)
        self.line = line
        self.column = column


class IndentError(QubeSyntaxError):
    pass


class SchemaError(QubeError, ValueError):
    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class OutOfBounds(QubeError, ValueError):
    pass


class UnknownField(QubeError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown field"


class CorruptField(QubeError, IOError):
    pass


class ShortRead(QubeError, IOError):
    pass


class CapExceeded(QubeError, ValueError):
    pass
