"""Exception hierarchy shared across the package.

The CLI maps exceptions to exit codes through the ``exit_code`` class
attribute: input and configuration problems exit 2, degenerate-statistics
conditions exit 3.
"""


class DissentError(Exception):
    """Base class for every error raised by this package (CLI exit 2)."""

    exit_code = 2


class StatisticsDegenerateError(DissentError):
    """A computation is statistically degenerate (CLI exit 3)."""

    exit_code = 3
