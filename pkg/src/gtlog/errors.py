"""Exception hierarchy shared by all gtlog components."""

from __future__ import annotations


class GtlogError(Exception):
    """Base class for every error raised by gtlog."""


class GtlogSyntaxError(GtlogError):
    """Program text failed to parse."""

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        self.line = line
        self.column = column
        self.token = token
        super().__init__(f"{message} at line {line}, column {column}"
                         + (f" (near {token!r})" if token else ""))


class AnalysisError(GtlogError):
    """Program is syntactically valid but semantically ill-formed."""

    def __init__(self, message: str, span: tuple[int, int] | None = None):
        self.span = span
        if span is not None:
            message = f"{message} (rule at line {span[0]}, column {span[1]})"
        super().__init__(message)


class UnknownPredicate(AnalysisError):
    pass


class UnsafeVariable(AnalysisError):
    def __init__(self, variable: str, span: tuple[int, int] | None = None):
        self.variable = variable
        super().__init__(f"variable '{variable}' is not bound by a positive body literal", span)


class ArityMismatch(AnalysisError):
    pass


class AggregationConflict(AnalysisError):
    pass


class DirectiveError(AnalysisError):
    pass


class NotFunctional(AnalysisError):
    pass


class NilCheckError(AnalysisError):
    """`P = nil` used outside the rules of P's own recursive clique."""


class CompileError(GtlogError):
    pass


class EvalError(GtlogError):
    """Base class for errors raised while evaluating a program."""


class TypeMismatch(EvalError):
    pass


class ConversionError(EvalError):
    pass


class RuntimeTypeError(EvalError):
    def __init__(self, message: str, span: tuple[int, int] | None = None):
        self.span = span
        if span is not None:
            message = f"{message} (rule at line {span[0]}, column {span[1]})"
        super().__init__(message)


class FunctionalValueConflict(EvalError):
    def __init__(self, predicate: str, key: tuple, values: tuple):
        self.predicate = predicate
        self.key = key
        self.values = values
        super().__init__(
            f"functional predicate {predicate} maps key {key!r} to several values {values!r}")


class KeyAbsent(EvalError):
    pass


class EvalTimeout(EvalError):
    pass


class IoError(GtlogError):
    pass


class ParseError(GtlogError):
    """A data file is malformed; `line` is 1-based."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"{message} (line {line})")


class NotADag(GtlogError):
    pass


class InvalidInterval(GtlogError):
    pass


class MissingColumn(GtlogError):
    pass
