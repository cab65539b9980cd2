"""Exception types shared across the engine.

The CLI maps ConfigError (and plain I/O failures) to exit code 2 and
everything else raised from the numerics to exit code 1.
"""


class BohmflowError(Exception):
    """Base class for engine errors."""


class ValidationError(BohmflowError):
    """Invalid argument; ``field`` names the offending parameter."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NodeError(BohmflowError):
    """Velocity/phase requested at (or too close to) a wavefield node."""


class SingularFieldError(BohmflowError):
    """Field evaluation requested at a singular point of the solution."""


class NoBracketError(BohmflowError):
    """A scan did not bracket the extremum it was asked to locate."""


class NumericalError(BohmflowError):
    """A numeric stage produced non-finite or inconsistent results."""


class ConfigError(BohmflowError):
    """Bad run configuration or unusable output location."""

    def __init__(self, message, field=None, path=None):
        super().__init__(message)
        self.field = field
        self.path = path
