"""Exception types raised by the geometry, estimation, and pipeline stages."""


class AutoLabelError(Exception):
    """Base class for all library errors."""


class NonPositiveDepth(AutoLabelError):
    """A point to project or a depth to unproject is at or behind the camera."""


class EmptyMesh(AutoLabelError):
    """Mesh has no vertices or no non-degenerate face."""


class InsufficientOverlap(AutoLabelError):
    """Fewer than the required number of jointly valid depth pixels."""


class DegenerateDepth(AutoLabelError):
    """Relative depth map carries no signal (all values zero)."""


class UnknownViewId(AutoLabelError):
    """A correspondence references a view id with no rendered view."""


class TooFewCorrespondences(AutoLabelError):
    """PnP needs at least 4 correspondences."""


class DegenerateConfiguration(AutoLabelError):
    """Correspondence geometry does not admit a pose solution."""


class EmptyOverlap(AutoLabelError):
    """Real and rendered masks share no valid pixel; pose likely failed upstream."""


class NonPositiveScale(AutoLabelError):
    """Scale factor must be strictly positive."""


class DegeneratePlaneProjection(AutoLabelError):
    """Points collapse to a single point when projected onto the horizontal plane."""


class EmptyPointSet(AutoLabelError):
    """Operation requires at least one point."""


class EmptyPairs(AutoLabelError):
    """Global scale fitting requires at least one box pair."""


class ManifestInvalid(AutoLabelError):
    """Image manifest is malformed or references missing inputs."""
