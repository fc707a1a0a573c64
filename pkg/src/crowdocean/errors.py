"""Exception hierarchy shared by every stage of the pipeline.

Each class carries the CLI exit code it maps to.
"""

from __future__ import annotations


class CrowdOceanError(Exception):
    exit_code = 3


class ConfigError(CrowdOceanError):
    exit_code = 1


class UsageError(CrowdOceanError):
    exit_code = 1


class ValidationError(CrowdOceanError):
    exit_code = 2


class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInputError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    pass


class AgentLookupError(ValidationError, LookupError):
    pass


class InputError(ValidationError, ValueError):
    pass


class FormatError(ValidationError):
    pass


class DimensionError(FormatError):
    pass


class TrainingError(CrowdOceanError):
    exit_code = 3

    def __init__(self, message: str, iteration: int | None = None):
        self.iteration = iteration
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
