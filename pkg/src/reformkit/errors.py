"""Exception hierarchy shared across the toolkit."""


class ReformkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ReformkitError):
    """Input data or configuration violates a declared invariant."""


class AlignmentError(ReformkitError):
    """Parallel data is not aligned (missing text, length mismatch)."""


class UsageError(ReformkitError):
    """API or CLI called with unsupported arguments."""
