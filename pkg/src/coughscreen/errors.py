"""Exception hierarchy shared across the package."""


class CoughScreenError(Exception):
    """Base class for every error raised by coughscreen."""


class MalformedContainer(CoughScreenError):
    pass


class UnsupportedEncoding(CoughScreenError):
    pass


class EmptyAudio(CoughScreenError):
    pass


class InvalidRate(CoughScreenError, ValueError):
    pass


class InvalidParams(CoughScreenError, ValueError):
    pass


class EmptyInput(CoughScreenError, ValueError):
    pass


class SingleClassData(CoughScreenError, ValueError):
    pass


class DimensionMismatch(CoughScreenError, ValueError):
    pass


class NonFiniteInput(CoughScreenError, ValueError):
    pass


class InsufficientData(CoughScreenError, ValueError):
    pass


class LengthMismatch(CoughScreenError, ValueError):
    pass


class MissingColumn(CoughScreenError):
    pass


class UnreadableFile(CoughScreenError):
    pass


class UnknownLabel(CoughScreenError, ValueError):
    pass


class ConfigError(CoughScreenError, ValueError):
    pass


class UnsupportedFormatVersion(CoughScreenError, ValueError):
    pass
