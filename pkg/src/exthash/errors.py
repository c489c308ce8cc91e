"""Exception hierarchy shared by the simulator and the table structures."""


class ExthashError(Exception):
    """Base class for all package errors."""


class ParameterError(ExthashError):
    """A model parameter or configuration value violates its contract."""


class DeviceError(ExthashError):
    """Access to a block index that was never allocated."""


class BlockCapacityError(ExthashError):
    """Attempt to store more than b items in one block.

    Table code must never trigger this; if it fires, the table has a bug.
    """


class DuplicateItemError(ExthashError):
    """Insertion of a hash value that is already stored."""


class EmptyTableError(ExthashError):
    """A measurement that needs stored items was run on an empty structure."""


class MemoryBudgetError(ExthashError):
    """Memory-resident footprint exceeded the m-word budget."""
