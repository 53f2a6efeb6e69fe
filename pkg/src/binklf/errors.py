"""Error types shared across the package."""


class ConfigurationError(ValueError):
    """A model, scenario, or run configuration is inconsistent."""


class NumericalError(RuntimeError):
    """A positive-definite factorization or solve failed."""
