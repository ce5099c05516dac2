"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes or indices do not conform."""


class UnsupportedTransformError(ValueError):
    """The requested operation is not defined for this scalar transform."""


class ResourceLimitError(RuntimeError):
    """A configured memory or size ceiling would be exceeded."""


class ContractViolationError(ValueError):
    """An input violates a documented precondition (e.g. non-orthonormal basis)."""


class ConfigError(ValueError):
    """An experiment configuration is invalid or inconsistent."""
