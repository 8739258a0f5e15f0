"""Exception types raised by the library."""
from __future__ import annotations


class RegulusError(Exception):
    """Base class for library-specific failures."""


class OffSurfaceError(RegulusError):
    """A point handed to a surface-only operation does not lie on the zero set."""


class SingularGradientError(RegulusError):
    """The field gradient vanishes where a normal direction is required."""


class AmbiguousProjectionError(RegulusError):
    """Nearest-point projection has two well-separated near-minimizers."""


class TubeExitError(RegulusError):
    """A finite-difference stencil left the tube where the height is defined."""


class MidpointSearchError(RegulusError):
    """No admissible chord midpoint exists on the sampled boundary.

    Witnesses non-regularity at the working radius: the recursive midpoint
    construction found a segment whose bisector ball holds no compatible
    sample.
    """


class NoContourError(RegulusError):
    """Level-set extraction found no sign change inside the box."""


class InconsistentShapeError(RegulusError):
    """Shape parameters do not produce a valid closed boundary."""


class AllRefutedError(RegulusError):
    """Radius search refuted every probe down to the sampling resolution."""


class FileFormatError(RegulusError):
    """A boundary file could not be parsed (message carries path and line)."""
