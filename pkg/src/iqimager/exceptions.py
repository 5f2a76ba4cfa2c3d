"""Exception hierarchy used across the package."""


class IQImagerError(Exception):
    """Base class for all package errors."""


class ConfigurationError(IQImagerError, ValueError):
    """A configuration value violates its documented constraint."""


class AnalysisError(IQImagerError, RuntimeError):
    """A spectrum or trace cannot support the requested measurement."""


class FrameError(IQImagerError, ValueError):
    """A frame of traces is incomplete or inconsistent with its array."""


class ReportError(IQImagerError, ValueError):
    """Depth maps handed to a report do not line up with each other or the truth."""
