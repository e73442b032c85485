"""Shared exception base for the package."""


class IlluminateError(Exception):
    """Base class for every error raised by this package."""
