"""Exception types raised by robfusion."""


class GridMismatchError(ValueError):
    """Two grid-valued objects were combined but live on different grids."""


class NumericalInconsistencyError(ArithmeticError):
    """A quantity that must be nonnegative came out clearly negative."""


class CapacityError(MemoryError):
    """A dense allocation request exceeded the configured budget."""

    def __init__(self, requested_bytes, limit_bytes):
        self.requested_bytes = int(requested_bytes)
        self.limit_bytes = int(limit_bytes)
        super().__init__(
            f"dense allocation of {self.requested_bytes} bytes exceeds "
            f"limit of {self.limit_bytes} bytes; use the streaming variant"
        )


class InvalidLawError(ValueError):
    """A density/CDF pair violated basic probability constraints."""


class DegenerateLawError(ValueError):
    """The parent density vanishes at its median."""


class BoundInapplicableError(ValueError):
    """The tail bound was requested outside its domain of validity."""
