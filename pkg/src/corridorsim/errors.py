"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid scenario or component configuration."""


class GeometryError(ValueError):
    """Degenerate geometric input, e.g. coincident BS/UAV positions."""


class TensorFormatError(ValueError):
    """Channel tensor file is missing, malformed, or inconsistent."""


class InfeasibleAssignmentError(ValueError):
    """More UAVs than available BS-beam pairs."""
