"""Exception hierarchy shared by every mapkit module."""


class MapkitError(Exception):
    """Base class for all engine errors."""


class SignatureError(MapkitError):
    """A name is not part of the signature it is used with."""


class CapacityError(MapkitError):
    """An enumeration would exceed the configured size bound."""


class ArgumentError(MapkitError, ValueError):
    """An operator was called outside its precondition."""


class CompatibilityError(ArgumentError):
    """Two structures disagree on the valuation of a shared world."""


class ParseError(MapkitError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ValidationError(MapkitError):
    """Raised when a theory is used despite a failing validation report."""

    def __init__(self, report):
        self.report = report
        super().__init__("\n".join(str(i) for i in report.errors))


class CategoryError(MapkitError):
    """An action has no kind, or more than one."""


class ObservabilityError(MapkitError):
    """An agent is both fully and partially observant of one occurrence."""


class EffectConsistencyError(MapkitError):
    """An action would make a fluent both true and false in one world."""


class FrameError(MapkitError):
    """A frame of reference has a shape the construction does not allow."""


class UnsupportedShapeError(MapkitError):
    """The update-model route is not defined for this action shape."""


class DefinitenessError(MapkitError):
    """An initial statement is outside the forms used for generation."""


class InconsistencyError(MapkitError):
    """The initial statements have no model."""
