"""Shared exception types."""


class BackendError(RuntimeError):
    """Spin-backend precondition violated."""


class ConvergenceError(RuntimeError):
    """Iterative solver did not reach tolerance within its budget."""


class InternalError(RuntimeError):
    """A solver invariant was violated (indicates a bug, not bad input)."""


class CutoffError(RuntimeError):
    """Fock truncation too small for the requested computation."""


class ConfigError(ValueError):
    """Malformed configuration input."""
