"""Exception types shared across the package."""


class PaceSimError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PaceSimError):
    """A domain object violates one of its invariants."""


class ConfigurationError(PaceSimError):
    """A parameter value lies outside its legal range."""


class ScenarioError(PaceSimError):
    """A scenario file is missing, malformed, or fails validation."""


class UnsupportedConfigError(PaceSimError):
    """The exact oracle cannot handle the requested configuration."""
