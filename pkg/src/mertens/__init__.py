"""Locating and certifying negative values of the Mertens deviation."""

__version__ = "0.1.0"
