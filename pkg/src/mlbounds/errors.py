"""Shared exception types.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""


class MlboundsError(Exception):
    """Base class for package errors."""


class ValidationError(MlboundsError, ValueError):
    """Invalid argument, inconsistent object, or malformed input data."""


class FileFormatError(ValidationError):
    """Text input rejected; message carries file:line context."""


class ProviderLookupError(ValidationError):
    """A base-bound provider has no value for a requested (snr, d*) pair."""


class ResourceLimitError(MlboundsError, RuntimeError):
    """A guard refused work that would exceed desk-scale limits."""
