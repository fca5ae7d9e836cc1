class GaitkitError(Exception):
    """Base class for all pipeline errors."""


class MalformedInput(GaitkitError, ValueError):
    pass


class InsufficientData(GaitkitError, ValueError):
    pass


class ConfigError(GaitkitError, ValueError):
    pass


class ShapeError(GaitkitError, ValueError):
    pass


class SchemaError(GaitkitError, ValueError):
    pass


class InvalidArgument(GaitkitError, ValueError):
    pass


class NumericalError(GaitkitError, ArithmeticError):
    pass


class ConvergenceError(GaitkitError, RuntimeError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class StratificationError(GaitkitError, ValueError):
    def __init__(self, message, label=None):
        super().__init__(message)
        self.label = label


class StageError(GaitkitError):
    """A failure inside one named pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"{cause}")
        self.stage = stage
        self.cause = cause
