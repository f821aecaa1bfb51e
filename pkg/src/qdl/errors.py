"""Exception hierarchy shared by all qdl modules."""

from __future__ import annotations


class QdlError(Exception):
    """Base class. ``span`` points into the source text when known."""

    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        if self.span is not None:
            return f"{self.span}: {self.message}"
        return self.message


class QdlSyntaxError(QdlError):
    def __init__(self, message: str, span=None, expected: str | None = None):
        super().__init__(message, span)
        self.expected = expected


class SortError(QdlError):
    def __init__(self, message: str, span=None, expected=None, found=None):
        super().__init__(message, span)
        self.expected = expected
        self.found = found


class UnsupportedFeature(QdlError):
    pass


class MissingBinding(QdlError):
    pass


class BoundExceeded(QdlError):
    pass


class NotAdmissible(QdlError):
    pass


class RuleMismatch(QdlError):
    pass


class NotInjective(RuleMismatch):
    pass


class NoSolution(RuleMismatch):
    pass


class NonAdmissibleInstantiation(RuleMismatch):
    pass


class QeInapplicable(RuleMismatch):
    pass


class SkolemDependency(RuleMismatch):
    pass


class VariantVariableOccurs(RuleMismatch):
    pass


class ReplayError(QdlError):
    def __init__(self, message: str, step: int | None = None, cause: Exception | None = None):
        super().__init__(message)
        self.step = step
        self.cause = cause

    def __str__(self) -> str:
        where = f"step {self.step}: " if self.step is not None else ""
        return where + self.message


class UnsupportedOde(QdlError):
    pass


class UnsupportedDegree(QdlError):
    def __init__(self, var: str, degree: int):
        super().__init__(f"cannot eliminate {var}: degree {degree} with remaining parameters")
        self.var = var
        self.degree = degree


class ObjectSortAtom(QdlError):
    pass
