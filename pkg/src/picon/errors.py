"""Exception hierarchy shared by every picon module."""


class PiconError(Exception):
    """Base class for all errors raised by picon."""


class ParseError(PiconError):
    """Malformed protocol, architecture or theory source."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class DuplicateComponentId(ParseError):
    pass


class ReplicationUnsupported(ParseError):
    pass


class ArityError(PiconError):
    pass


class UnknownComponent(PiconError):
    pass


class UndefinedOperand(PiconError):
    pass


class BudgetExceeded(PiconError):
    """A configured resource budget ran out."""


class StateSpaceBudgetExceeded(BudgetExceeded):
    pass


class SearchBudgetExceeded(BudgetExceeded):
    pass
