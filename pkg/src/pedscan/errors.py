"""Exception hierarchy shared by the pedscan modules.

The CLI maps each family onto an exit code, so callers can triage batch
failures without parsing messages.
"""


class PedscanError(Exception):
    """Base class for all package errors."""


class ImageFormatError(PedscanError):
    """Unreadable or unsupported image content (bad header, bit depth, size)."""


class ConfigError(PedscanError, ValueError):
    """Invalid configuration or argument values."""


class SegmentationError(PedscanError):
    """The segmented image does not contain two plausible feet."""


class GeometryError(PedscanError):
    """Geometric feature extraction failed for a foot region."""
