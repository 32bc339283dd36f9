"""Exception types shared across the package."""


class MilvadError(Exception):
    """Base class for all package errors."""


class InputError(MilvadError, ValueError):
    """An operation rejected its inputs (shape, range or mode violation)."""


class CorruptFileError(MilvadError, ValueError):
    """A feature container failed magic/version/size validation."""


class DatasetError(MilvadError, ValueError):
    """A manifest or feature file violates a dataset invariant."""


class MetricUndefinedError(MilvadError, ValueError):
    """A metric was requested on inputs it is not defined for."""
