"""Exception hierarchy shared by all modules."""


class GTSError(Exception):
    """Base class for every error raised by advgts."""


class DuplicateTag(GTSError):
    pass


class AmbiguousTag(GTSError):
    pass


class MissingTag(GTSError):
    pass


class ContextMismatch(GTSError):
    pass


class MatchInvalid(GTSError):
    pass


class DanglingEdge(GTSError):
    pass


class ApplicationConditionViolated(GTSError):
    pass


class UnknownRuleName(GTSError):
    pass


class NotCompleted(GTSError):
    """A checker was handed an LTS with an expanded state lacking successors."""


class OracleTooLarge(GTSError):
    pass


class ParseError(GTSError):
    def __init__(self, message: str, line: int = 0, column: int = 0, expected: str = ""):
        self.line = line
        self.column = column
        self.expected = expected
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")


class ResolutionError(GTSError):
    def __init__(self, message: str, name: str = ""):
        self.name = name
        super().__init__(message)
