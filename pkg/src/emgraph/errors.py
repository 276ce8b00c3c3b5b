"""Exception types shared across the package."""


class EmgError(Exception):
    """Base class for all emgraph errors."""


class CsvParseError(EmgError):
    """A CSV row or header could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class LayoutError(EmgError):
    """Dataset directory layout does not match <root>/{pd,healthy}/{left,right}/*.csv."""


class EmptyInputError(EmgError):
    """An operation received no data."""


class OrderingError(EmgError):
    """Timestamps or stage marks are not strictly increasing."""


class InsufficientDataError(EmgError):
    """Too few samples for the requested computation."""


class InvalidInputError(EmgError):
    """Input contains non-finite or otherwise unusable values."""


class DegenerateDataError(EmgError):
    """Data is degenerate for the operation (zero variance, constant column, single class)."""


class UndefinedSpectrumError(EmgError):
    """Spectrum has zero total power, so spectral summaries are undefined."""


class UndefinedScalingError(EmgError):
    """Correlation sum has fewer than two usable radii, no scaling region."""


class TruncatedRecordingError(EmgError):
    """Recording ends before the protocol reaches a required segment."""

    def __init__(self, message: str, missing_segment=None):
        super().__init__(message)
        self.missing_segment = missing_segment


class ShapeError(EmgError):
    """Array dimensions do not match the model or operation."""


class ParameterError(EmgError):
    """A configuration parameter is out of its valid range."""


class EmptyMaskError(EmgError):
    """A node mask selects no nodes."""


class DivergenceError(EmgError):
    """Optimization produced non-finite values."""


class FormatError(EmgError):
    """Unknown output format."""


class StratificationError(EmgError):
    """A class has fewer samples than the requested number of folds."""
