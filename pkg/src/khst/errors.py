"""Exception hierarchy shared by all modules."""


class KhError(Exception):
    """Base class for every error raised by this package."""


class MalformedSyntax(KhError):
    pass


class InconsistentArcs(KhError):
    pass


class OrientationConflict(KhError):
    pass


class NotRealizable(KhError):
    pass


class RecordError(KhError):
    def __init__(self, line: int, cause: str, path: str = ""):
        self.line = line
        self.cause = cause
        self.path = path
        where = f"{path}:{line}" if path else f"line {line}"
        super().__init__(f"{where}: {cause}")


class UnknownName(KhError):
    pass


class LengthMismatch(KhError):
    pass


class NotAnEdge(KhError):
    pass


class NotAFace(KhError):
    pass


class TooLarge(KhError):
    pass


class DimensionMismatch(KhError):
    pass


class EmptyGroup(KhError):
    pass


class NotACocycle(KhError):
    pass


class NegativeComponent(KhError):
    pass
