"""Pointing-direction estimation from a stream of anchor readings.

Pipeline: convert readings to Cartesian positions, smooth with a
constant-velocity Kalman filter, then take the first principal component
of the mean-centered positions as the pointing direction.  The PC1 sign
is oriented along the net displacement (a pointing gesture moves toward
its target).

Note on the direction objective: maximizing the summed squared projection
of *raw* positions is dominated by the centroid direction, so the samples
are mean-centered before the eigendecomposition; that matches the
projected-variance intent and makes the estimate translation invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GestureTooShortError,
    InsufficientDataError,
    NonMonotoneTimestampsError,
)
from .geom import UwbReading, Vec3, spherical_to_cartesian_array

# Direction estimation needs at least this many samples; at the 55 Hz
# reporting rate even a fast 0.2 s gesture yields ~11.
MIN_SAMPLES = 8

# Net displacement below this is refused outright (error) ...
MIN_DISPLACEMENT_M = 0.03
# ... and below this only warned about: accuracy degrades under ~10 cm.
WARN_DISPLACEMENT_M = 0.10

# Trajectories with PC1 explaining less than this fraction of the total
# variance are flagged as non-linear (arcs, isotropic clouds, eigen ties).
LINEARITY_THRESHOLD = 0.90


@dataclass(frozen=True)
class KalmanConfig:
    """Constant-velocity filter parameters, both configurable.

    process_noise_accel: white-acceleration density driving Q (m/s^2)
    measurement_noise:   per-axis position measurement sigma (m)
    """

    process_noise_accel: float = 0.5
    measurement_noise: float = 0.05

    def __post_init__(self):
        if self.process_noise_accel <= 0 or self.measurement_noise <= 0:
            raise ValueError("Kalman noise parameters must be > 0")


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered Cartesian samples of the user device."""

    times: np.ndarray      # (M,) seconds, strictly increasing
    positions: np.ndarray  # (M, 3) meters

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.positions, dtype=float)
        if t.ndim != 1 or p.shape != (t.shape[0], 3):
            raise ValueError(f"shape mismatch: times {t.shape}, positions {p.shape}")
        if t.shape[0] == 0:
            raise InsufficientDataError("empty trajectory")
        if np.any(np.diff(t) <= 0):
            bad = int(np.argmax(np.diff(t) <= 0)) + 1
            raise NonMonotoneTimestampsError(
                f"timestamps not strictly increasing at sample {bad}"
            )
        # Concurrency contract: trajectories are immutable once constructed.
        t = t.copy()
        p = p.copy()
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", p)

    def __len__(self) -> int:
        return int(self.times.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.positions, other.positions
        )

    def position_at(self, index: int) -> Vec3:
        return Vec3.from_array(self.positions[index])

    def centroid(self) -> Vec3:
        return Vec3.from_array(self.positions.mean(axis=0))

    def net_displacement(self) -> float:
        return float(np.linalg.norm(self.positions[-1] - self.positions[0]))

    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass(frozen=True)
class PointingRay:
    """Estimated gesture: smoothed samples plus unit pointing direction."""

    direction: Vec3
    sample_positions: Trajectory
    net_displacement: float
    mean_speed: float
    explained_variance_ratio: float

    @property
    def origin(self) -> Vec3:
        """Centroid of the smoothed samples; the gesture's representative location."""
        return self.sample_positions.centroid()


@dataclass(frozen=True)
class QualityReport:
    too_short: bool
    too_few_samples: bool
    low_linearity: bool
    flags: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not (self.too_short or self.too_few_samples or self.low_linearity)


def _readings_to_arrays(readings) -> tuple[np.ndarray, np.ndarray]:
    times = np.array([r.timestamp for r in readings], dtype=float)
    positions = spherical_to_cartesian_array(
        [r.distance for r in readings],
        [r.azimuth for r in readings],
        [r.elevation for r in readings],
    )
    return times, positions


def smooth_trajectory(readings: list[UwbReading], cfg: KalmanConfig = KalmanConfig()) -> Trajectory:
    """Kalman-smooth a reading stream into a Cartesian trajectory.

    6-D state (position, velocity) under a constant-velocity model with
    white-acceleration process noise; measurements are the converted
    Cartesian positions.  One output sample per input reading.
    """
    if len(readings) < 2:
        raise InsufficientDataError(f"need at least 2 readings, got {len(readings)}")
    times, measurements = _readings_to_arrays(readings)
    if np.any(np.diff(times) <= 0):
        bad = int(np.argmax(np.diff(times) <= 0)) + 1
        raise NonMonotoneTimestampsError(f"timestamps not strictly increasing at reading {bad}")

    sigma_a2 = cfg.process_noise_accel**2
    r_var = cfg.measurement_noise**2

    # State per axis: [position, velocity]; the three axes are independent,
    # so run one 2-state filter per axis vectorized across axes.
    x_pos = measurements[0].copy()
    x_vel = np.zeros(3)
    # Position pinned to the first measurement, velocity wide open.
    p11 = np.full(3, r_var)
    p12 = np.zeros(3)
    p22 = np.full(3, 100.0)

    out = np.empty_like(measurements)
    out[0] = x_pos

    last_dt = None
    q11 = q12 = q22 = 0.0
    for k in range(1, len(times)):
        dt = float(times[k] - times[k - 1])
        if dt != last_dt:
            q11 = 0.25 * dt**4 * sigma_a2
            q12 = 0.5 * dt**3 * sigma_a2
            q22 = dt**2 * sigma_a2
            last_dt = dt

        # Predict.
        x_pos = x_pos + dt * x_vel
        p11_n = p11 + 2.0 * dt * p12 + dt * dt * p22 + q11
        p12_n = p12 + dt * p22 + q12
        p22_n = p22 + q22

        # Update with the position measurement.
        s = p11_n + r_var
        k1 = p11_n / s
        k2 = p12_n / s
        innov = measurements[k] - x_pos
        x_pos = x_pos + k1 * innov
        x_vel = x_vel + k2 * innov
        p11 = (1.0 - k1) * p11_n
        p12 = (1.0 - k1) * p12_n
        p22 = p22_n - k2 * p12_n

        out[k] = x_pos

    return Trajectory(times=times, positions=out)


def _principal_direction(positions: np.ndarray) -> tuple[np.ndarray, float]:
    """PC1 of the mean-centered samples and its explained-variance ratio."""
    centered = positions - positions.mean(axis=0)
    cov = centered.T @ centered / centered.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    # eigh returns ascending order; PC1 is the last column.
    total = float(eigvals.sum())
    ratio = float(eigvals[-1] / total) if total > 0.0 else 0.0
    return eigvecs[:, -1], ratio


def estimate_direction(
    traj: Trajectory,
    min_samples: int = MIN_SAMPLES,
    min_displacement: float = MIN_DISPLACEMENT_M,
) -> PointingRay:
    """Estimate the pointing direction of a (smoothed) trajectory.

    The direction is the principal eigenvector of the sample covariance,
    sign-oriented so that it points along p(M) - p(1).
    """
    if len(traj) < min_samples:
        raise InsufficientDataError(
            f"direction estimation needs >= {min_samples} samples, got {len(traj)}"
        )
    net_vec = traj.positions[-1] - traj.positions[0]
    net = float(np.linalg.norm(net_vec))
    if net < min_displacement:
        raise GestureTooShortError(
            f"net displacement {net * 100:.1f} cm below the {min_displacement * 100:.0f} cm floor"
        )

    direction, ratio = _principal_direction(traj.positions)
    if float(direction @ net_vec) < 0.0:
        direction = -direction

    duration = traj.duration()
    mean_speed = net / duration if duration > 0 else 0.0
    return PointingRay(
        direction=Vec3.from_array(direction).normalized(),
        sample_positions=traj,
        net_displacement=net,
        mean_speed=mean_speed,
        explained_variance_ratio=ratio,
    )


def gesture_quality(
    ray: PointingRay,
    min_samples: int = MIN_SAMPLES,
    warn_displacement: float = WARN_DISPLACEMENT_M,
    linearity_threshold: float = LINEARITY_THRESHOLD,
) -> QualityReport:
    """Soft checks on an estimated gesture; never raises."""
    too_short = ray.net_displacement < warn_displacement
    too_few = len(ray.sample_positions) < min_samples
    low_linearity = ray.explained_variance_ratio < linearity_threshold
    flags = tuple(
        name
        for name, on in (
            ("too_short", too_short),
            ("too_few_samples", too_few),
            ("low_linearity", low_linearity),
        )
        if on
    )
    return QualityReport(
        too_short=too_short,
        too_few_samples=too_few,
        low_linearity=low_linearity,
        flags=flags,
    )


def estimate_pointing(
    readings: list[UwbReading],
    cfg: KalmanConfig = KalmanConfig(),
    min_samples: int = MIN_SAMPLES,
    min_displacement: float = MIN_DISPLACEMENT_M,
) -> PointingRay:
    """Full gesture pipeline: smooth the readings, then estimate the direction."""
    traj = smooth_trajectory(readings, cfg)
    return estimate_direction(traj, min_samples=min_samples, min_displacement=min_displacement)
