"""Exception types raised by stepwell."""


class StepwellError(Exception):
    """Base class for all package errors."""


class DomainError(StepwellError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class LevelIndexError(StepwellError, IndexError):
    """Requested bound-state index does not exist for the well."""


class NoBoundStatesError(StepwellError):
    """The well (at some time node) supports no bound states."""


class UnsupportedConfigurationError(StepwellError, ValueError):
    """Contract/query placement the pricing formulas do not cover."""


class ConfigError(StepwellError, ValueError):
    """Invalid run or simulation configuration."""
