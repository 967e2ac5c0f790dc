"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class DefalignError(Exception):
    exit_code = 1


class ConfigError(DefalignError):
    exit_code = 2


class ParseError(DefalignError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    exit_code = 3

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


class ValidationError(ParseError):
    """Well-formed input that violates a content rule (duplicates, NaN, ...)."""


class TransportError(DefalignError):
    exit_code = 4

    def __init__(self, message, status=None, attempts=None):
        super().__init__(message)
        self.status = status
        self.attempts = attempts


class ProviderError(TransportError):
    """The endpoint answered, but with something unusable."""


class InsufficientDataError(DefalignError, ValueError):
    exit_code = 5


class BoundsError(DefalignError, IndexError):
    exit_code = 6


class DomainError(DefalignError, ValueError):
    exit_code = 6


class ArityError(DefalignError, ValueError):
    exit_code = 6


class UndefinedCorrelationError(DefalignError, ValueError):
    exit_code = 5
