from typing import List, Optional, Tuple


class ElorderError(Exception):
    """Base class for all errors raised by elorder."""
    pass


class InvalidArgumentError(ElorderError, ValueError):
    """Raised when a numeric or structural argument is invalid."""
    pass


class DomainError(ElorderError, ValueError):
    """Raised when a probability argument lies outside its open domain."""
    pass


class InputDataError(ElorderError):
    """
    Raised when a data file cannot be ingested.

    Carries every problem found, each as a (line_number, message) pair,
    so the caller can report them all at once.
    """
    def __init__(self, message: str, problems: Optional[List[Tuple[int, str]]] = None):
        self.problems = problems or []
        if self.problems:
            details = "; ".join(f"line {line}: {text}" for line, text in self.problems)
            message = f"{message} ({details})"
        super().__init__(message)


class ConfigError(ElorderError):
    """Raised when a power-study configuration file is malformed."""
    def __init__(self, message: str, field_errors: Optional[List[str]] = None):
        self.field_errors = field_errors or []
        if self.field_errors:
            message = f"{message}: " + "; ".join(self.field_errors)
        super().__init__(message)


class CacheError(ElorderError):
    """Raised when a cached null-distribution file cannot be parsed."""
    pass
