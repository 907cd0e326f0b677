"""Exception hierarchy shared by the library and the command line."""


class RydswapError(Exception):
    exit_code = 1


class ConfigurationError(RydswapError, ValueError):
    """Inconsistent scheme/channel/preset combination or missing input file."""

    exit_code = 3


class InputError(RydswapError, ValueError):
    """Malformed numeric input (non-finite controls, bad table rows, ...)."""

    exit_code = 3


class DomainError(RydswapError, ValueError):
    exit_code = 3


class DataGapError(RydswapError, LookupError):
    """Requested atomic data is not covered by the shipped tables."""

    exit_code = 4


class NumericalError(RydswapError, ArithmeticError):
    exit_code = 5
