"""Device registration by two pointing gestures, plus the device catalog.

A new device's position is the near-intersection of two pointing rays
captured from distinct user positions: solve the two-line least-squares
system and take the midpoint of the common perpendicular.  Registration
is guarded by the angle-separation rule (directions at least 20 degrees
apart, otherwise small direction errors blow up the triangulation) and by
the user-separation prompt.  Guarded outcomes are returned as
``GuidanceNeeded`` values, not exceptions, so interactive clients can
prompt instead of abort.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import NotFoundError, ParallelRaysError
from .geom import Ray, Vec3, angle_between, nearest_point_between_rays
from .pointing import PointingRay

# Directions closer than this make triangulation unstable; boundary inclusive.
MIN_REGISTRATION_ANGLE = math.radians(20.0)

# Below this user displacement the angle condition is unlikely to hold.
MIN_USER_SEPARATION_M = 1.4

# Comparisons against the thresholds above allow this much slack so that
# geometries constructed exactly at a boundary land on the inclusive side.
_BOUNDARY_EPS = 1e-9

DEFAULT_INSTABILITY_THRESHOLD_M = 0.5


@dataclass(frozen=True)
class DeviceRecord:
    """One registered device in the catalog."""

    id: str
    label: str
    position: Vec3
    registered_at: float = 0.0
    registration_gap: float = 0.0
    registration_angle: float = 0.0

    def replace_position(self, position: Vec3, registered_at: float,
                         gap: float, angle: float) -> "DeviceRecord":
        return DeviceRecord(
            id=self.id,
            label=self.label,
            position=position,
            registered_at=registered_at,
            registration_gap=gap,
            registration_angle=angle,
        )


@dataclass(frozen=True)
class RegistrationAttempt:
    """Two pointing rays aimed at the same device from distinct positions."""

    ray1: PointingRay
    ray2: PointingRay

    def lines(self) -> tuple[Ray, Ray]:
        # Ray origin = centroid of the gesture's smoothed samples, the
        # minimum-variance representative of "where the phone was".
        return (
            Ray(self.ray1.origin, self.ray1.direction),
            Ray(self.ray2.origin, self.ray2.direction),
        )

    def angle(self) -> float:
        return angle_between(self.ray1.direction, self.ray2.direction)


@dataclass(frozen=True)
class GuidanceNeeded:
    """Non-error outcome: the user should adjust and retry."""

    reason: str          # "angle-too-small" | "separation-too-small" | "parallel-rays"
    hint: str            # what to do about it; currently always "move-farther"
    angle: float | None = None
    separation: float | None = None


@dataclass(frozen=True)
class TriangulationResult:
    position: Vec3
    gap: float
    angle: float
    t1: float
    t2: float


def solve_two_ray_position(ray1: PointingRay, ray2: PointingRay) -> TriangulationResult:
    """Unguarded two-ray triangulation; raises ParallelRaysError when singular."""
    line1 = Ray(ray1.origin, ray1.direction)
    line2 = Ray(ray2.origin, ray2.direction)
    point, t1, t2, gap = nearest_point_between_rays(line1, line2)
    return TriangulationResult(
        position=point,
        gap=gap,
        angle=angle_between(ray1.direction, ray2.direction),
        t1=t1,
        t2=t2,
    )


def user_separation_check(p1: Vec3, p2: Vec3,
                          min_separation: float = MIN_USER_SEPARATION_M) -> GuidanceNeeded | None:
    """None when the two user positions are far enough apart, guidance otherwise."""
    separation = p1.distance_to(p2)
    if separation >= min_separation - _BOUNDARY_EPS:
        return None
    return GuidanceNeeded(
        reason="separation-too-small",
        hint="move-farther",
        separation=separation,
    )


class DeviceCatalog:
    """Registered devices of one scenario.

    Mutations are serialized by a lock (single writer); records are frozen
    snapshots, so reads need no coordination.
    """

    def __init__(self, devices: list[DeviceRecord] | None = None):
        self._lock = threading.Lock()
        self._devices: dict[str, DeviceRecord] = {}
        for dev in devices or []:
            if dev.id in self._devices:
                raise ValueError(f"duplicate device id {dev.id!r}")
            self._devices[dev.id] = dev

    def __len__(self) -> int:
        return len(self._devices)

    def list(self) -> list[DeviceRecord]:
        return sorted(self._devices.values(), key=lambda d: d.id)

    def get(self, device_id: str) -> DeviceRecord:
        try:
            return self._devices[device_id]
        except KeyError:
            raise NotFoundError(f"unknown device id {device_id!r}") from None

    def add(self, record: DeviceRecord) -> None:
        with self._lock:
            if record.id in self._devices:
                raise ValueError(f"duplicate device id {record.id!r}")
            self._devices[record.id] = record

    def replace(self, record: DeviceRecord) -> None:
        with self._lock:
            if record.id not in self._devices:
                raise NotFoundError(f"unknown device id {record.id!r}")
            self._devices[record.id] = record

    def remove(self, device_id: str) -> DeviceRecord:
        with self._lock:
            try:
                return self._devices.pop(device_id)
            except KeyError:
                raise NotFoundError(f"unknown device id {device_id!r}") from None

    def next_id(self, label: str) -> str:
        base = "".join(c if c.isalnum() else "-" for c in label.lower()).strip("-") or "device"
        if base not in self._devices:
            return base
        k = 2
        while f"{base}-{k}" in self._devices:
            k += 1
        return f"{base}-{k}"


def register_device(
    catalog: DeviceCatalog,
    label: str,
    ray1: PointingRay,
    ray2: PointingRay,
    device_id: str | None = None,
    min_angle: float = MIN_REGISTRATION_ANGLE,
) -> DeviceRecord | GuidanceNeeded:
    """Register a device from two pointing gestures.

    Stores nothing when guidance is needed (angle below the threshold or
    parallel rays).  The record timestamp is the later gesture's last
    sample time, which keeps registration fully deterministic.
    """
    attempt = RegistrationAttempt(ray1, ray2)
    try:
        solution = solve_two_ray_position(ray1, ray2)
    except ParallelRaysError:
        return GuidanceNeeded(reason="parallel-rays", hint="move-farther", angle=0.0)

    if solution.angle < min_angle - _BOUNDARY_EPS:
        return GuidanceNeeded(
            reason="angle-too-small",
            hint="move-farther",
            angle=solution.angle,
        )

    registered_at = max(
        float(attempt.ray1.sample_positions.times[-1]),
        float(attempt.ray2.sample_positions.times[-1]),
    )
    record = DeviceRecord(
        id=device_id or catalog.next_id(label),
        label=label,
        position=solution.position,
        registered_at=registered_at,
        registration_gap=solution.gap,
        registration_angle=solution.angle,
    )
    catalog.add(record)
    return record


def update_device(
    catalog: DeviceCatalog,
    device_id: str,
    ray1: PointingRay,
    ray2: PointingRay,
    min_angle: float = MIN_REGISTRATION_ANGLE,
) -> DeviceRecord | GuidanceNeeded:
    """Re-register an existing device from a fresh pair of gestures."""
    existing = catalog.get(device_id)
    try:
        solution = solve_two_ray_position(ray1, ray2)
    except ParallelRaysError:
        return GuidanceNeeded(reason="parallel-rays", hint="move-farther", angle=0.0)
    if solution.angle < min_angle - _BOUNDARY_EPS:
        return GuidanceNeeded(reason="angle-too-small", hint="move-farther", angle=solution.angle)
    registered_at = max(
        float(ray1.sample_positions.times[-1]),
        float(ray2.sample_positions.times[-1]),
    )
    record = existing.replace_position(
        solution.position, registered_at, solution.gap, solution.angle
    )
    catalog.replace(record)
    return record


def remove_device(catalog: DeviceCatalog, device_id: str) -> DeviceRecord:
    return catalog.remove(device_id)


def list_devices(catalog: DeviceCatalog) -> list[DeviceRecord]:
    return catalog.list()


@dataclass(frozen=True)
class SensitivityReport:
    """Spread of perturbed triangulations around the unperturbed solution."""

    spread: float        # RMS distance (meters) of perturbed solutions
    trials: int          # perturbations that produced a solution
    skipped: int         # perturbations discarded as parallel
    unstable: bool       # spread exceeded the caller's threshold

    def __post_init__(self):
        if self.spread < 0:
            raise ValueError("spread must be >= 0")


def _tilt(direction: np.ndarray, u: np.ndarray, v: np.ndarray,
          angle: float, phase: float) -> np.ndarray:
    """Rotate ``direction`` by ``angle`` toward the perpendicular at ``phase``."""
    axis_offset = math.cos(phase) * u + math.sin(phase) * v
    tilted = math.cos(angle) * direction + math.sin(angle) * axis_offset
    return tilted / np.linalg.norm(tilted)


def perturbation_sensitivity(
    attempt: RegistrationAttempt,
    epsilon: float,
    trials: int = 200,
    seed: int = 0,
    instability_threshold: float = DEFAULT_INSTABILITY_THRESHOLD_M,
) -> SensitivityReport:
    """Probe how sensitive the triangulated position is to direction error.

    Each trial rotates both ray directions independently by a random angle
    in [0, epsilon] about a random perpendicular axis and re-solves; the
    spread is the RMS distance from the unperturbed solution.  A large
    spread means the two pointing positions were too close together.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    base = solve_two_ray_position(attempt.ray1, attempt.ray2)
    base_p = base.position.as_array()

    rng = np.random.default_rng(seed)
    d1 = attempt.ray1.direction.as_array()
    d2 = attempt.ray2.direction.as_array()
    o1 = attempt.ray1.origin
    o2 = attempt.ray2.origin
    u1 = np.cross(d1, [0.0, 1.0, 0.0] if abs(d1[1]) < 0.9 else [1.0, 0.0, 0.0])
    u1 /= np.linalg.norm(u1)
    v1 = np.cross(d1, u1)
    u2 = np.cross(d2, [0.0, 1.0, 0.0] if abs(d2[1]) < 0.9 else [1.0, 0.0, 0.0])
    u2 /= np.linalg.norm(u2)
    v2 = np.cross(d2, u2)

    sq_sum = 0.0
    solved = 0
    skipped = 0
    for _ in range(trials):
        a1, a2 = rng.uniform(0.0, epsilon, size=2) if epsilon > 0 else (0.0, 0.0)
        ph1, ph2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
        try:
            p1 = Ray(o1, Vec3.from_array(_tilt(d1, u1, v1, a1, ph1)))
            p2 = Ray(o2, Vec3.from_array(_tilt(d2, u2, v2, a2, ph2)))
            point, _, _, _ = nearest_point_between_rays(p1, p2)
        except ParallelRaysError:
            skipped += 1
            continue
        sq_sum += float(np.sum((point.as_array() - base_p) ** 2))
        solved += 1

    spread = math.sqrt(sq_sum / solved) if solved else float("inf")
    return SensitivityReport(
        spread=spread,
        trials=solved,
        skipped=skipped,
        unstable=spread > instability_threshold,
    )
