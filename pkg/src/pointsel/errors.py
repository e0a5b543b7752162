"""Exception types shared across the package.

Every error carries a stable ``code`` string so the gateway can map
library errors onto protocol error replies without string matching.
"""

from __future__ import annotations


class PointselError(Exception):
    """Base class for all library errors."""

    code = "INTERNAL"


class InvalidReadingError(PointselError):
    """A UWB reading violates its invariants (non-finite, d <= 0, angle range)."""

    code = "INVALID_READING"


class DegeneratePositionError(PointselError):
    """Zero-length vector where a position/direction is required."""

    code = "DEGENERATE_POSITION"


class ParallelRaysError(PointselError):
    """The two-ray system has no unique least-squares solution."""

    code = "PARALLEL_RAYS"


class NonMonotoneTimestampsError(PointselError):
    """Timestamps in a stream are not strictly increasing."""

    code = "NON_MONOTONE_TIMESTAMPS"


class InsufficientDataError(PointselError):
    """Too few samples for the requested operation."""

    code = "INSUFFICIENT_DATA"


class GestureTooShortError(PointselError):
    """Net displacement of a gesture is below the hard floor."""

    code = "GESTURE_TOO_SHORT"


class DegenerateGeometryError(PointselError):
    """Device coincides with a trajectory sample or similar singular setup."""

    code = "DEGENERATE_GEOMETRY"


class EmptyCatalogError(PointselError):
    """Selection requested against an empty device catalog."""

    code = "EMPTY_CATALOG"


class NotFoundError(PointselError):
    """Unknown device id or scenario name."""

    code = "NOT_FOUND"


class OutOfFovError(PointselError):
    """A simulated path leaves the anchor's field of view / usable range."""

    code = "OUT_OF_FOV"

    def __init__(self, message: str, sample_index: int | None = None):
        super().__init__(message)
        self.sample_index = sample_index


class ParseError(PointselError):
    """Malformed trace or scenario file; message carries line/field context."""

    code = "PARSE_ERROR"

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        super().__init__(message)
        self.line = line
        self.field = field


class UnsupportedVersionError(PointselError):
    """File declares a format_version this build does not understand."""

    code = "UNSUPPORTED_VERSION"


class ProtocolError(PointselError):
    """Gateway message violates the protocol schema."""

    code = "PROTOCOL_ERROR"
