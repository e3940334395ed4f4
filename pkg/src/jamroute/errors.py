"""Exception types shared across the package."""

from __future__ import annotations


class ConfigurationError(ValueError):
    """A config value or combination of values is invalid or degenerate."""


class ConfigParseError(ConfigurationError):
    """A config document is malformed; the message names the offending field."""


class GenerationError(RuntimeError):
    """Topology sampling exhausted its retry budget without a usable draw."""


class DegeneratePositionError(ValueError):
    """A point sits exactly on the road line, so its plane is undefined."""


class OracleSizeError(RuntimeError):
    """The brute-force enumeration would exceed its sequence budget."""
