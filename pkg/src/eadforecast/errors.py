"""Exception hierarchy mapped onto the CLI exit codes."""


class ConfigError(Exception):
    """Bad usage, bad configuration, or incompatible shapes (exit code 1)."""


class DataError(Exception):
    """Malformed or inconsistent input data (exit code 2)."""


class NumericalError(Exception):
    """Numerical failure: divergence, undefined metric, oracle breakdown (exit code 3)."""
