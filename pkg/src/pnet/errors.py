"""Exception types shared across the package.

Every domain error derives from PnetError so callers (scripts, the service,
the CLI) can convert any failure into a structured error with a stable code.
"""

from __future__ import annotations


class PnetError(Exception):
    """Base class for all domain errors raised by this package."""

    @property
    def code(self) -> str:
        return type(self).__name__


# ---------------------------------------------------------------------------
# network graph

class UnknownId(PnetError):
    pass


class KindMismatch(PnetError):
    pass


class SelfLink(PnetError):
    pass


class NoSuchParamForKind(PnetError):
    pass


class NonPositiveInertia(PnetError):
    pass


class MalformedTable(PnetError):
    pass


class IllegalParamValue(PnetError):
    pass


# ---------------------------------------------------------------------------
# labels and pickers

class MalformedLabel(PnetError):
    pass


class LabelTaken(PnetError):
    pass


class UnknownLabel(PnetError):
    pass


class SystemLabelProtected(PnetError):
    pass


class PickerSyntaxError(PnetError):
    def __init__(self, message: str, pos: int | None = None):
        super().__init__(message if pos is None else f"{message} (at offset {pos})")
        self.pos = pos


# ---------------------------------------------------------------------------
# scripting

class ScriptError(PnetError):
    """Base for script errors; carries a 1-based source position when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class UnbalancedBrace(ScriptError):
    pass


class UnbalancedBracket(ScriptError):
    pass


class EmptyVariableName(ScriptError):
    pass


class UnknownCommand(ScriptError):
    pass


class WrongArity(ScriptError):
    pass


class ExprSyntaxError(ScriptError):
    pass


class LimitExceeded(ScriptError):
    pass


class ScriptRuntimeError(ScriptError):
    """A command failed while executing; wraps the underlying domain error."""

    def __init__(self, message, line=None, col=None, cause: Exception | None = None):
        super().__init__(message, line, col)
        self.cause = cause


class DuplicatePackage(PnetError):
    pass


class AmbiguousCommand(ScriptError):
    pass


# ---------------------------------------------------------------------------
# simulation engine

class NotValidated(PnetError):
    def __init__(self, message: str, issues=None):
        super().__init__(message)
        self.issues = issues or []


class MissingSignal(PnetError):
    pass


class NumericBlowup(PnetError):
    def __init__(self, message: str, step: int, module_id: int,
                 partial_steps: int = 0):
        super().__init__(message)
        self.step = step
        self.module_id = module_id
        self.partial_steps = partial_steps
        self.partial = None  # RunResult up to partial_steps, set by the runner


class SimCancelled(PnetError):
    def __init__(self, message: str = "cancelled", partial_steps: int = 0):
        super().__init__(message)
        self.partial_steps = partial_steps
        self.partial = None


class InvalidEngine(PnetError):
    pass


# ---------------------------------------------------------------------------
# persistence and media

class DocumentParseError(PnetError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)
        self.line = line
        self.col = col


class VersionUnsupported(PnetError):
    pass


class IntegrityError(PnetError):
    pass


class UnsupportedFormat(PnetError):
    pass


class RateMismatch(PnetError):
    pass


class EmptyChannelSet(PnetError):
    pass


class BadScheme(PnetError):
    pass


class MissingParameter(PnetError):
    pass


# ---------------------------------------------------------------------------
# session service

class BadVerb(PnetError):
    pass


class ConflictingSimulation(PnetError):
    pass


class NoSuchChannel(PnetError):
    pass
