"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical failures with 3, and I/O failures with 4.
"""


class ProfinnError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ProfinnError):
    """Invalid configuration, bad preconditions, or malformed inputs."""

    exit_code = 2


class NumericalError(ProfinnError):
    """Non-finite values, domain violations, or failed numerical procedures."""

    exit_code = 3


class OracleError(NumericalError):
    """The implicit-equation root finder failed to converge."""


class LineSearchError(NumericalError):
    """No step length satisfying the Wolfe conditions was found."""
