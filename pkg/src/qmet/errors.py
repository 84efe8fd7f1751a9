"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input violates a numeric-domain contract (non-Hermitian, negative
    spectrum beyond tolerance, out-of-range parameter, ...)."""


class ConfigError(ValueError):
    """Bad configuration file or CLI parameter combination."""
