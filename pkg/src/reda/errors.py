"""Exception types raised by the reda package."""


class RedaError(Exception):
    """Base class for all data errors raised by this package."""


class EmptyText(RedaError, ValueError):
    """Raised when a text is empty or contains only whitespace."""


class ParseError(RedaError, ValueError):
    def __init__(self, message: str, path=None, line_no: int | None = None):
        self.path = path
        self.line_no = line_no
        where = ""
        if path is not None:
            where += f"{path}:"
        if line_no is not None:
            where += f"{line_no}: " if where else f"line {line_no}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class InsufficientExamples(RedaError, ValueError):
    pass


class OddSize(RedaError, ValueError):
    pass


class EmptyCorpus(RedaError, ValueError):
    pass


class IndexOutOfRange(RedaError, IndexError):
    pass
