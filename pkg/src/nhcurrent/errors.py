"""Exception types shared across the package.

ConfigError marks rejected input (bad config file, inconsistent shapes);
NumericalError marks a computation that started but could not finish to
tolerance (norm collapse, CFL violation, solver breakdown). The CLI maps
them to exit codes 2 and 3.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent user-facing configuration."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to produce a trustworthy result."""
