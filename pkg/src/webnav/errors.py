"""Exception types shared across the package."""


class WebnavError(Exception):
    """Base class for all webnav errors."""


class ConfigurationError(WebnavError):
    """Invalid parameter or configuration value (CLI exit code 2)."""


class ParseError(WebnavError):
    """Malformed input file.

    Carries the 1-based line number when known.
    """

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DataError(WebnavError):
    """Input data that parses but cannot be used (e.g. empty graph)."""


class EmptyDataError(DataError):
    """No usable records at all (CLI exit code 4)."""


class StatisticsError(WebnavError):
    """Estimation impossible: too few or degenerate samples."""


class ProtocolError(WebnavError):
    """Operations called out of order (e.g. a click before any session start)."""
