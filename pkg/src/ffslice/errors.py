"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: InputError -> 2, BudgetError -> 3,
ConsistencyError -> 4.
"""


class FfsliceError(Exception):
    """Base class for all errors raised by this package."""


class InputError(FfsliceError, ValueError):
    """Malformed or unsupported input (bad prime, parse error, wrong shape)."""


class FieldMismatchError(InputError):
    """Operands belong to different fields or ambient spaces."""


class PolySyntaxError(InputError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnsupportedDegreeError(InputError):
    pass


class BudgetError(FfsliceError):
    """A configured enumeration or field-size cap would be exceeded."""


class ConsistencyError(FfsliceError):
    """Internal cross-check failed; indicates a counting bug."""
