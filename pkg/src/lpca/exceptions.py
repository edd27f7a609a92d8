"""Exception types raised across the package."""


class LPCAError(Exception):
    """Base class for errors raised by :mod:`lpca`."""


class DomainError(LPCAError, ValueError):
    """An argument lies outside the domain of a function."""


class ConfigError(LPCAError, ValueError):
    """Invalid fit or generator configuration."""


class DataError(LPCAError, ValueError):
    """Input data violates a structural requirement."""


class ParseError(DataError):
    """Malformed response table.

    ``row`` and ``column`` are 1-based positions in the source text when
    known (the header is row 1).
    """

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column
