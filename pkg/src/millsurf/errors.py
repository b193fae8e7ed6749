"""Exception types shared across the package."""


class MillsurfError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MillsurfError, ValueError):
    """A numeric input violates an operation's domain (e.g. a point off the insert arc)."""


class ConfigError(MillsurfError, ValueError):
    """A configuration document is malformed, inconsistent, or out of bounds."""


class SurfaceFormatError(MillsurfError):
    """A surface file is corrupt, truncated, or has the wrong magic/version."""
