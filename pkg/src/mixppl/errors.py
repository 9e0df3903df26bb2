"""Exception hierarchy.

Errors split into two families that the command line maps to distinct exit
codes: problems with the model text or its fitness for an engine
(:class:`ModelError`, exit 2) and failures while sampling or weighting
(:class:`InferenceError`, exit 3).
"""


class MixPPLError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ModelError(MixPPLError):
    exit_code = 2


class LexError(ModelError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class ParseError(ModelError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} at line {line}, column {column}"
        super().__init__(message)
        self.line = line
        self.column = column


class ResolveError(ModelError):
    pass


class UnknownIdentifierError(ResolveError):
    pass


class TypeMismatchError(ResolveError):
    pass


class StaticCycleError(ResolveError):
    pass


class MixWeightError(ResolveError):
    pass


class OriginSignatureError(ResolveError):
    pass


class UnsupportedModelError(ModelError):
    """The model is valid but the requested engine cannot handle it."""


class InferenceError(MixPPLError):
    exit_code = 3


class InvalidParametersError(InferenceError):
    pass


class EvaluationError(InferenceError):
    pass


class WellFoundednessError(InferenceError):
    """A variable was re-entered while its own value was still pending."""


class ObjectCapError(InferenceError):
    pass


class ZeroWeightError(InferenceError):
    pass


class DegeneracyError(InferenceError):
    def __init__(self, step, message=None):
        super().__init__(message or f"all particles have zero weight at t={step}")
        self.step = step


class EnumerationError(MixPPLError):
    """Raised by the exact-enumeration oracle."""
