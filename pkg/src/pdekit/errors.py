"""Exception hierarchy.

Every error raised on purpose by the library derives from PdekitError so the
CLI can map it to exit code 2 without catching programming errors.
"""
from __future__ import annotations


class PdekitError(Exception):
    """Base class for analysis errors."""


class FieldMismatch(PdekitError):
    pass


class IndexOutOfRange(PdekitError):
    pass


class NotFormallyIntegrable(PdekitError):
    pass


class NotInvolutive(PdekitError):
    pass


class NotFirstOrder(PdekitError):
    pass


class SearchExhausted(PdekitError):
    pass


class OrderCapExceeded(PdekitError):
    pass


class TruncationExhausted(PdekitError):
    pass


class CertificateFailed(PdekitError):
    def __init__(self, message: str, deficit: int = 0, truncation: int | None = None):
        super().__init__(message)
        self.deficit = deficit
        self.truncation = truncation


class DimensionMismatch(PdekitError):
    pass


class ElementIsZero(PdekitError):
    pass


class NotConstantCoefficients(PdekitError):
    pass


class WrongCodimension(PdekitError):
    pass


class PdeSyntaxError(PdekitError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UndeclaredSymbol(PdeSyntaxError):
    pass


class InconsistentArity(PdeSyntaxError):
    pass


class DivisionByZero(PdekitError, ZeroDivisionError):
    pass
