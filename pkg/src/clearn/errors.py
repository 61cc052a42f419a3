"""Exception types raised across the package."""


class CLearnError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(CLearnError, ValueError):
    """A parameter is outside its admissible range."""


class InvalidInputError(CLearnError, ValueError):
    """An input value is non-finite or otherwise unusable."""


class DimensionMismatchError(CLearnError, ValueError):
    pass


class BoundaryError(CLearnError, ValueError):
    """Probability at 0 or 1 where the population minimizer diverges."""


class DegenerateWeightsError(CLearnError, ArithmeticError):
    pass


class SingleClassError(CLearnError, ValueError):
    """Training or calibration data contains only one label."""


class CalibrationError(SingleClassError):
    pass


class MetricDomainError(CLearnError, ValueError):
    pass


class CSVParseError(CLearnError, ValueError):
    """Malformed CSV content. ``line`` is 1-based and counts the header."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class HeaderError(CSVParseError):
    pass


class LabelError(CSVParseError):
    pass


class RaggedRowError(CSVParseError):
    pass
