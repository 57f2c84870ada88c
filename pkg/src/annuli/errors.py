"""Exception types shared across the package."""


class DomainError(ValueError):
    """Evaluation was requested outside a profile's or map's domain."""


class EvaluationError(RuntimeError):
    """Numeric evaluation failed at a specific point (for example a
    vanishing image norm under a weighted integrand)."""


class ConfigError(ValueError):
    """Malformed command line or configuration file input."""
