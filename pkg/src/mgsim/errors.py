"""Exception hierarchy shared by every mgsim module."""


class MicrogridError(Exception):
    """Base class for all mgsim errors."""


class DomainError(MicrogridError, ValueError):
    """An argument lies outside its admissible range."""


class LengthError(MicrogridError, ValueError):
    pass


class ParseError(MicrogridError, ValueError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class DegenerateProfileError(MicrogridError, ValueError):
    pass


class SplitError(MicrogridError):
    pass


class SimultaneousChargeError(MicrogridError, ValueError):
    pass


class EpisodeOverError(MicrogridError):
    pass


class ShapeError(MicrogridError, ValueError):
    pass


class HorizonError(MicrogridError, ValueError):
    pass


class ConfigError(MicrogridError, ValueError):
    pass
