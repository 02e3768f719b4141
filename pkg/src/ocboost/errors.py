"""Exception types shared across the package.

The CLI maps these onto exit codes: usage/config problems exit 1, data format
problems exit 2, numeric failures exit 3.
"""


class OcboostError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(OcboostError, ValueError):
    """Invalid configuration value (bad smoothing, unknown mode, ...)."""


class DataFormatError(OcboostError, ValueError):
    """Malformed input file (IDX, CSV, state snapshot, classifier file)."""


class UnboundedAlphaError(OcboostError, ArithmeticError):
    """A coordinate weight sum is zero with smoothing 0, so alpha diverges."""

    def __init__(self, message: str, coordinate: int | None = None):
        super().__init__(message)
        self.coordinate = coordinate


class NumericOverflowError(OcboostError, ArithmeticError):
    """A weight cell or example weight left the representable/configured range."""

    def __init__(self, message: str, coordinate: int | None = None,
                 example_index: int | None = None):
        super().__init__(message)
        self.coordinate = coordinate
        self.example_index = example_index


class SelectionError(OcboostError, RuntimeError):
    """The weak-learner search produced no usable hypothesis."""
