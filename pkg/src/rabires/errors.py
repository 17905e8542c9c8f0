"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain of the requested quantity."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""
