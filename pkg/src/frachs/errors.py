"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematically admissible range."""


class ConfigError(ValueError):
    """An experiment or CLI configuration is malformed or inconsistent."""


class InvariantError(RuntimeError):
    """A computed report violates one of its declared invariants."""
