"""Exception hierarchy shared by all modules."""


class BBMITError(Exception):
    """Base class for every error raised by this package."""


class InvalidElement(BBMITError, ValueError):
    pass


class InvalidIndex(BBMITError, IndexError):
    pass


class SpanTooLarge(BBMITError):
    pass


class EnumerationTooLarge(BBMITError):
    pass


class MatrixTooLarge(BBMITError):
    pass


class ArityError(BBMITError, ValueError):
    pass


class NotMultilinear(BBMITError, ValueError):
    pass


class NotApplicable(BBMITError):
    """Raised when a verifier's precondition (e.g. f not an identity) fails."""


class NotAProperCoset(BBMITError, ValueError):
    pass


class LemmaViolation(BBMITError, AssertionError):
    """An exhaustive check found a counterexample to a proven bound."""


class MarkedSetEmpty(BBMITError, ValueError):
    pass


class MarkedFractionZero(BBMITError, ValueError):
    pass


class AlphaInfeasible(BBMITError, ValueError):
    pass


class MTooLarge(BBMITError, ValueError):
    pass


class MalformedInstance(BBMITError, ValueError):
    pass


class UnknownLetter(BBMITError, KeyError):
    pass


class ParseError(BBMITError):
    def __init__(self, message, path=None, line=None, column=None):
        loc = []
        if path is not None:
            loc.append(str(path))
        if line is not None:
            loc.append(f"line {line}, column {column}")
        super().__init__(f"{': '.join(loc)}: {message}" if loc else message)
        self.path = path
        self.line = line
        self.column = column


class SchemaError(BBMITError, ValueError):
    def __init__(self, message, field=""):
        super().__init__(f"{field or '<root>'}: {message}")
        self.field = field


class ReportError(BBMITError, ValueError):
    """A report cannot be emitted (missing seed, unknown format, bad value)."""
