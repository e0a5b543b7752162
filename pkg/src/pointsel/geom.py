"""Coordinate conversions, 3-D vector algebra, and the skew-line solver.

Anchor frame convention (used by every module): the anchor sits at the
origin, +z is the boresight, +y is up, +x is right.  A reading with zero
azimuth and zero elevation therefore lies on the +z axis.  Angles are
radians everywhere inside the library; degrees appear only at file, CLI,
and UI boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneratePositionError,
    InvalidReadingError,
    ParallelRaysError,
)

# Cross products below this magnitude are treated as parallel: the normal
# matrix of the two-ray least-squares system is singular there.
PARALLEL_THRESHOLD = 1e-9

UNIT_NORM_TOLERANCE = 1e-9

_RAD_PER_DEG = math.pi / 180.0
_DEG_PER_RAD = 180.0 / math.pi


def deg_to_rad(value_deg: float) -> float:
    return value_deg * _RAD_PER_DEG


def rad_to_deg(value_rad: float) -> float:
    return value_rad * _DEG_PER_RAD


@dataclass(frozen=True)
class Vec3:
    """Cartesian point or vector in the anchor frame (meters, or unit-length)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise DegeneratePositionError(f"non-finite vector components: {self!r}")

    @staticmethod
    def from_array(a) -> "Vec3":
        return Vec3(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def distance_to(self, other: "Vec3") -> float:
        return (self - other).norm()

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise DegeneratePositionError("cannot normalize the zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def is_unit(self, tol: float = UNIT_NORM_TOLERANCE) -> bool:
        return abs(self.norm() - 1.0) <= tol


@dataclass(frozen=True)
class UwbReading:
    """One anchor measurement: two-way-ranging distance plus arrival angles.

    distance    meters, > 0
    azimuth     radians in (-pi, pi]
    elevation   radians in [-pi/2, pi/2]
    timestamp   seconds, strictly increasing within a stream
    """

    distance: float
    azimuth: float
    elevation: float
    timestamp: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.distance) or self.distance <= 0.0:
            raise InvalidReadingError(f"distance must be finite and > 0, got {self.distance}")
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)
                and math.isfinite(self.timestamp)):
            raise InvalidReadingError("non-finite angle or timestamp")
        if not (-math.pi < self.azimuth <= math.pi):
            raise InvalidReadingError(f"azimuth {self.azimuth} outside (-pi, pi]")
        if not (-math.pi / 2 <= self.elevation <= math.pi / 2):
            raise InvalidReadingError(f"elevation {self.elevation} outside [-pi/2, pi/2]")


@dataclass(frozen=True)
class Ray:
    """Line through ``origin`` along the unit vector ``direction``."""

    origin: Vec3
    direction: Vec3

    def __post_init__(self):
        if not self.direction.is_unit():
            raise DegeneratePositionError(
                f"ray direction must be unit-norm, |d| = {self.direction.norm():.12f}"
            )

    def point_at(self, t: float) -> Vec3:
        return self.origin + self.direction.scaled(t)


def spherical_to_cartesian(reading: UwbReading) -> Vec3:
    """Map (distance, azimuth, elevation) to the anchor-frame position.

    x = d cos(el) sin(az), y = d sin(el), z = d cos(el) cos(az).
    """
    d = reading.distance
    cos_el = math.cos(reading.elevation)
    return Vec3(
        d * cos_el * math.sin(reading.azimuth),
        d * math.sin(reading.elevation),
        d * cos_el * math.cos(reading.azimuth),
    )


def cartesian_to_spherical(p: Vec3, timestamp: float = 0.0) -> UwbReading:
    """Inverse of :func:`spherical_to_cartesian`; timestamp is passed through."""
    d = p.norm()
    if d == 0.0:
        raise DegeneratePositionError("cannot convert the origin to spherical coordinates")
    elevation = math.asin(max(-1.0, min(1.0, p.y / d)))
    azimuth = math.atan2(p.x, p.z)
    if azimuth <= -math.pi:
        azimuth = math.pi
    return UwbReading(distance=d, azimuth=azimuth, elevation=elevation, timestamp=timestamp)


def spherical_to_cartesian_array(distances, azimuths, elevations) -> np.ndarray:
    """Vectorized conversion for (M,) arrays; returns (M, 3) positions."""
    d = np.asarray(distances, dtype=float)
    az = np.asarray(azimuths, dtype=float)
    el = np.asarray(elevations, dtype=float)
    cos_el = np.cos(el)
    return np.stack([d * cos_el * np.sin(az), d * np.sin(el), d * cos_el * np.cos(az)], axis=-1)


def cartesian_to_spherical_array(positions) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized inverse for (M, 3) positions -> (distances, azimuths, elevations)."""
    p = np.asarray(positions, dtype=float)
    d = np.linalg.norm(p, axis=-1)
    if np.any(d == 0.0):
        raise DegeneratePositionError("cannot convert the origin to spherical coordinates")
    el = np.arcsin(np.clip(p[..., 1] / d, -1.0, 1.0))
    az = np.arctan2(p[..., 0], p[..., 2])
    az = np.where(az <= -math.pi, math.pi, az)
    return d, az, el


def nearest_point_between_rays(a: Ray, b: Ray) -> tuple[Vec3, float, float, float]:
    """Midpoint of the common perpendicular between two lines.

    Solves [t1; t2] = (M^T M)^-1 M^T B with M = [n1 | -n2] and
    B = origin2 - origin1, then returns (midpoint, t1, t2, gap) where
    gap is the length of the common perpendicular segment.

    Raises ParallelRaysError when |n1 x n2| <= PARALLEL_THRESHOLD; there is
    no unique solution there and returning an arbitrary point would hide
    the degeneracy from callers.
    """
    n1 = a.direction
    n2 = b.direction
    if n1.cross(n2).norm() <= PARALLEL_THRESHOLD:
        raise ParallelRaysError("ray directions are parallel; no unique nearest point")

    # Normal equations of the 2-unknown system, written out directly.
    b_vec = b.origin - a.origin
    m11 = n1.dot(n1)
    m12 = -n1.dot(n2)
    m22 = n2.dot(n2)
    r1 = n1.dot(b_vec)
    r2 = -n2.dot(b_vec)
    det = m11 * m22 - m12 * m12
    t1 = (m22 * r1 - m12 * r2) / det
    t2 = (m11 * r2 - m12 * r1) / det

    p1 = a.point_at(t1)
    p2 = b.point_at(t2)
    midpoint = Vec3(0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y), 0.5 * (p1.z + p2.z))
    gap = p1.distance_to(p2)
    return midpoint, t1, t2, gap


def angle_between(u: Vec3, v: Vec3) -> float:
    """Angle in [0, pi] between two unit vectors."""
    return math.acos(max(-1.0, min(1.0, u.dot(v))))
