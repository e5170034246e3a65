"""Exception types shared across the package."""


class ToleranceError(ValueError):
    """A numerical invariant was violated beyond its stated tolerance."""


class GridOrderError(ToleranceError):
    """A sphere grid cannot integrate the requested band limit exactly."""


class StageError(ValueError):
    """A laboratory-pipeline operation was applied at the wrong stage."""


class ConfigError(ValueError):
    """Invalid, unknown, or out-of-range experiment configuration."""
