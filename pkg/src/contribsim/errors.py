"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments that break its contract."""


class CapacityError(ValueError):
    """An instance exceeds the size limit of an exact algorithm."""


class DataError(ValueError):
    """An input file or record stream is malformed."""
