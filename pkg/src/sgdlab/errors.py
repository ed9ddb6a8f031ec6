"""Exception types shared across the package."""


class SgdLabError(Exception):
    """Base class for errors raised by sgdlab."""


class ConfigError(SgdLabError):
    """Invalid experiment configuration (unknown key, bad value, missing input)."""


class NumericalError(SgdLabError):
    """A simulation or solver produced a non-finite or unusable state."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step
