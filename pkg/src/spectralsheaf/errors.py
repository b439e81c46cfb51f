class SpectralError(Exception):
    """Base class for domain errors raised by the package."""


class ParseError(SpectralError, ValueError):
    def __init__(self, msg, line=None, col=None):
        self.line, self.col = line, col
        if line is not None:
            msg = f"{msg} (line {line}, column {col})"
        super().__init__(msg)


class ValidationError(SpectralError, ValueError):
    pass


class FieldMismatch(SpectralError, TypeError):
    pass


class IrrationalSupport(SpectralError):
    """A second, incompatible quadratic extension would be needed."""


class InconclusivePrecision(SpectralError):
    """Known coefficients vanish but precision is below the confidence threshold."""


class PrecisionExhausted(InconclusivePrecision):
    """A requested coefficient lies beyond the known precision."""


class PoleOrderExceeded(SpectralError):
    pass


class IrregularC2(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class ConsistencyError(SpectralError):
    """Two independent computations disagree."""
