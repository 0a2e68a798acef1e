"""Shared exception base so callers can catch any package error uniformly."""


class EteaError(Exception):
    """Base class for every error raised by this package."""
