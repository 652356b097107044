"""Exception types shared across the package.

The CLI maps each class onto a process exit code.
"""


class MMSError(Exception):
    """Base class for all package errors."""


class ValidationError(MMSError, ValueError):
    """Input data does not describe a valid finite metric measure space."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DomainError(MMSError, ValueError):
    """A parameter lies outside the domain of the requested operation."""


class SizeGuardError(MMSError, ValueError):
    """Input exceeds the size limit of an exhaustive algorithm."""
