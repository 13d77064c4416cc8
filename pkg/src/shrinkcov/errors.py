"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class ShrinkcovError(Exception):
    exit_code = 1


class ConfigurationError(ShrinkcovError, ValueError):
    """Invalid parameter or configuration value."""

    exit_code = 2


class DataError(ShrinkcovError, ValueError):
    """Input data unusable: too short, malformed, non-finite."""

    exit_code = 3


class NumericError(ShrinkcovError, ArithmeticError):
    """A computation produced a non-finite value or failed to factorize."""

    exit_code = 4
