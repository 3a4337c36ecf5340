class CKError(Exception):
    """Base class for engine errors."""


class UsageError(CKError, ValueError):
    """Incompatible or out-of-contract arguments."""


class UnsupportedGraphError(CKError):
    """The graph violates a structural requirement of the operation (e.g. a sink)."""


class ParseError(CKError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}" if where else message)
