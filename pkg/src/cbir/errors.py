"""Exception hierarchy for the retrieval engine."""


class CbirError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(CbirError, ValueError):
    pass


class UnsupportedFormat(CbirError):
    pass


class CorruptImage(CbirError):
    pass


class ImageTooSmall(CbirError, ValueError):
    pass


class EmptyRect(CbirError, ValueError):
    pass


class RectTooSmall(CbirError, ValueError):
    pass


class DimensionMismatch(CbirError, ValueError):
    pass


class EmptyRegionList(CbirError, ValueError):
    pass


class ParameterMismatch(CbirError):
    """Two signatures (or a signature and an index) were built with different parameters."""


class FormatVersionMismatch(CbirError):
    pass


class CorruptRecord(CbirError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class EmptyIndex(CbirError):
    pass


class InsufficientResults(CbirError):
    pass


class MissingCategory(CbirError):
    pass


class UnlabeledImage(MissingCategory):
    pass
