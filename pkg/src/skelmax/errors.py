"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """Inconsistent grids, radius functions, selections or experiment settings."""


class PreconditionError(ValueError):
    """A caller-side precondition was violated."""


class InstanceTooLargeError(ValueError):
    """An exhaustive search would exceed its size guard."""
