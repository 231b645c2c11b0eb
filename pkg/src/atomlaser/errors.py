"""Exception hierarchy shared by all atomlaser modules."""


class AtomLaserError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(AtomLaserError, ValueError):
    pass


class DomainError(AtomLaserError, ValueError):
    pass


class NoResonanceError(AtomLaserError, ValueError):
    """The rf field has no resonance point inside the trap (detuning <= 0)."""


class BracketError(AtomLaserError, ValueError):
    pass


class ConvergenceError(AtomLaserError, RuntimeError):
    pass


class PropagationError(AtomLaserError, FloatingPointError):
    """A non-finite value appeared while integrating in time."""

    def __init__(self, message, time=None, step=None):
        super().__init__(message)
        self.time = time
        self.step = step


class ChirpExhaustedError(AtomLaserError, RuntimeError):
    """The compensating rf chirp would push the detuning to zero or below."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class DegenerateOutputError(AtomLaserError, ZeroDivisionError):
    """The output beam has zero velocity, so velocity widths are undefined."""


class ConfigError(AtomLaserError, ValueError):
    pass
