class DataFormatError(ValueError):
    """A ratings or demographics record could not be parsed.

    ``lineno`` is the 1-based line of the offending record, when known.
    """

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class DivergenceError(FloatingPointError):
    """Training produced a non-finite value."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class ArtifactError(ValueError):
    """An artifact file is missing, malformed, or has the wrong version/kind."""
