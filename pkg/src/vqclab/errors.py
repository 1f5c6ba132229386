"""Exception hierarchy shared by every vqclab module."""


class VqcLabError(Exception):
    """Base class for all library errors."""


class ConfigurationError(VqcLabError, ValueError):
    pass


class InvalidGateError(VqcLabError, ValueError):
    pass


class EncodingError(VqcLabError, ValueError):
    pass


class ShapeError(VqcLabError, ValueError):
    pass


class InputError(VqcLabError, ValueError):
    pass


class ParseError(VqcLabError, ValueError):
    pass


class SplitError(VqcLabError, ValueError):
    pass


class SelectionError(VqcLabError, ValueError):
    pass


class TrainingError(VqcLabError, RuntimeError):
    pass


class DivergenceError(TrainingError):
    """Loss became non-finite during optimisation."""


class TuningError(VqcLabError, ValueError):
    pass


class ComparisonError(VqcLabError, ValueError):
    pass
