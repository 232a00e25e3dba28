"""Exception types shared across the package."""


class CoalgError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CoalgError):
    """Malformed functor expression or coalgebra file."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}, column {column}: " if column is not None else f"line {line}: "
        super().__init__(where + message)


class InterfaceError(CoalgError):
    """A refinement interface was handed values of the wrong kind."""


class InvariantError(CoalgError):
    """Internal data structures are inconsistent (a bug, not bad input)."""
