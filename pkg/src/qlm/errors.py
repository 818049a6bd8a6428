"""Exception types shared across the package."""


class QLMError(Exception):
    """Base class for all package errors."""


class AdmissibilityError(QLMError, ValueError):
    """An input violates a hypothesis of the construction.

    ``reason`` is a short machine-readable tag (for example
    ``"beta_nonpositive"`` or ``"eq-bak"``) that the CLI copies into its
    failure report.
    """

    def __init__(self, reason, message=None):
        self.reason = reason
        super().__init__(message or reason)


class EmbeddingError(QLMError, ValueError):
    """The metric has no surface-of-revolution embedding in the fixed chart."""


class BracketError(QLMError, RuntimeError):
    """A root bracket could not be established."""
