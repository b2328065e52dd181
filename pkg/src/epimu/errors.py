"""Exception hierarchy shared by every module."""


class EpimuError(Exception):
    """Base class for all errors raised by epimu."""


class InputError(EpimuError):
    """A rejected input: malformed model, invalid run, bad argument."""


class ParseError(InputError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {col}" if col is not None else "") + ": "
        super().__init__(where + message)


class NonMixingError(InputError):
    """The formula is outside the non-mixing fragment for the given model."""

    def __init__(self, violation):
        self.violation = violation
        super().__init__(f"non-mixing violation at node {violation.node_str}: "
                         f"agents {violation.a} and {violation.b} have incomparable observations")


class BudgetExceeded(EpimuError):
    """A configurable size or iteration cap was hit."""
