"""Exception types shared across the package (mapped to CLI exit codes)."""

__all__ = ["ConfigError", "ToleranceError", "TruncationError"]


class ConfigError(ValueError):
    """Invalid configuration key or value (CLI exit code 2)."""


class ToleranceError(ArithmeticError):
    """A numerical routine failed to reach its requested tolerance (exit 3)."""


class TruncationError(RuntimeError):
    """Fock-space truncation too aggressive for the requested state (exit 4)."""
