"""Illuminate: depression-text analysis and therapy-orchestration toolkit."""

__version__ = "0.1.0"

from .errors import IlluminateError

__all__ = ["IlluminateError", "__version__"]
