"""Exception types shared across the simulator."""


class SwarmSimError(Exception):
    """Base class for all simulator errors."""


class ContractViolation(SwarmSimError, ValueError):
    """An operation was called with inputs violating its precondition."""


class DegenerateConfiguration(SwarmSimError, ValueError):
    """Coincident or collinear robots where a proper triangle/circle is required."""


class ConfigError(SwarmSimError, ValueError):
    """Invalid or inconsistent scenario configuration."""


class RegistryError(SwarmSimError, KeyError):
    """Unknown algorithm identifier."""
