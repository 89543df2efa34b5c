"""Exception hierarchy shared by all pipeline stages."""


class CeidsError(Exception):
    """Base class for every error raised by this package."""


class DataError(CeidsError):
    """Problems with input data (CLI exit code 3)."""


class ConfigError(CeidsError):
    """Problems with a pipeline configuration (CLI exit code 4)."""


class ParseError(DataError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class FieldCountError(ParseError):
    pass


class NumericParseError(ParseError):
    pass


class UnknownAttackError(ParseError):
    pass


class EmptyDatasetError(DataError):
    pass


class MissingClassError(DataError):
    pass


class ArityMismatchError(DataError, ValueError):
    pass


class BadTopologyError(ConfigError, ValueError):
    pass


class BadConfigError(ConfigError, ValueError):
    pass


class DegenerateDataError(DataError):
    pass


class EmptyNeighborhoodError(DataError):
    pass


class SingleClassError(DataError):
    pass


class TinyClusterError(DataError):
    pass


class LengthMismatchError(DataError, ValueError):
    pass


class EmptyError(DataError):
    pass


class BadKError(ConfigError, ValueError):
    pass


class ModelFormatError(CeidsError):
    """Base for model container problems (CLI exit code 3)."""


class FormatVersionError(ModelFormatError):
    pass


class ChecksumError(ModelFormatError):
    pass


class ConfigParseError(ConfigError):
    pass


class UnknownKeyError(ConfigError):
    pass


class RangeError(ConfigError):
    pass


class StageError(CeidsError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
