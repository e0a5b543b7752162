"""Synthetic single-anchor UWB measurement generator.

Generates ground-truth pointing gestures and the corresponding noisy
anchor readings, plus per-device distance/AoA feeds for the baseline
selectors.  Everything is deterministic under a fixed seed: identical
(spec, noise, anchor) inputs produce bit-identical outputs.

Noise model.  Published accuracy figures for this class of system report
end-to-end error only, never raw sensor noise, so the model here is
structured rather than copied: i.i.d. per-reading noise on distance and
both angles, plus optional per-gesture angle offsets (``bias_*``) that
stand in for the slowly varying angle-of-arrival biases of commodity
hardware (multipath and device-pose dependent, effectively constant over
a 1-3 s gesture).  Biases default to zero; the calibration routine in
``sweeps`` fits the whole profile against the published error medians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, OutOfFovError
from .geom import (
    UwbReading,
    Vec3,
    cartesian_to_spherical_array,
)
from .pointing import Trajectory

# Anchors cannot measure closer than this (near-field dead zone).
MIN_RANGE_M = 0.3

DEFAULT_SAMPLE_RATE_HZ = 55.0
DEFAULT_FOV_HALF_ANGLE = math.radians(60.0)

# Hand-tremor band: perpendicular wobble is low-pass filtered at this cutoff.
JITTER_CUTOFF_HZ = 2.0


@dataclass(frozen=True)
class NoiseModel:
    """Measurement noise applied by the synthetic anchor.

    sigma_distance / sigma_azimuth / sigma_elevation: i.i.d. per-reading
    Gaussian noise.  bias_azimuth / bias_elevation: standard deviations of
    a per-gesture constant angle offset (drawn once per generated stream).
    """

    sigma_distance: float = 0.03
    sigma_azimuth: float = math.radians(1.0)
    sigma_elevation: float = math.radians(1.0)
    seed: int = 0
    bias_azimuth: float = 0.0
    bias_elevation: float = 0.0

    def __post_init__(self):
        for name in ("sigma_distance", "sigma_azimuth", "sigma_elevation",
                     "bias_azimuth", "bias_elevation"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def with_seed(self, seed: int) -> "NoiseModel":
        return NoiseModel(
            sigma_distance=self.sigma_distance,
            sigma_azimuth=self.sigma_azimuth,
            sigma_elevation=self.sigma_elevation,
            seed=seed,
            bias_azimuth=self.bias_azimuth,
            bias_elevation=self.bias_elevation,
        )

    def scaled(self, factor: float) -> "NoiseModel":
        return NoiseModel(
            sigma_distance=self.sigma_distance * factor,
            sigma_azimuth=self.sigma_azimuth * factor,
            sigma_elevation=self.sigma_elevation * factor,
            seed=self.seed,
            bias_azimuth=self.bias_azimuth * factor,
            bias_elevation=self.bias_elevation * factor,
        )

    @staticmethod
    def zero(seed: int = 0) -> "NoiseModel":
        return NoiseModel(0.0, 0.0, 0.0, seed, 0.0, 0.0)


@dataclass(frozen=True)
class GestureSpec:
    """Ground-truth description of one pointing gesture.

    Aim imperfection has two parts, both per-gesture random tilts between
    the intended direction and the axis the hand actually moves along
    (zero reproduces a slide-track-perfect gesture):

    axis_wander: std (radians) of an isotropic lateral tilt.
    depth_wander: std (radians) of a tilt within the vertical plane
        containing the anchor-radial axis.  Lateral alignment is visually
        servoed against the target while the depth component of the
        motion is not, so depth errors dominate real pointing gestures.
    """

    start: Vec3
    direction: Vec3
    displacement: float
    speed: float
    jitter_amplitude: float = 0.003
    sample_rate: float = DEFAULT_SAMPLE_RATE_HZ
    axis_wander: float = 0.0
    depth_wander: float = 0.0

    def __post_init__(self):
        if not self.direction.is_unit(tol=1e-9):
            raise ValueError("gesture direction must be unit-norm")
        if self.displacement <= 0 or self.speed <= 0 or self.sample_rate <= 0:
            raise ValueError("displacement, speed and sample_rate must be > 0")
        if self.jitter_amplitude < 0 or self.axis_wander < 0 or self.depth_wander < 0:
            raise ValueError("jitter_amplitude and wander parameters must be >= 0")

    def sample_count(self) -> int:
        return max(2, round(self.displacement / self.speed * self.sample_rate))


@dataclass(frozen=True)
class AnchorModel:
    """The fixed anchor: frame origin, boresight along +z."""

    fov_half_angle: float = DEFAULT_FOV_HALF_ANGLE

    def __post_init__(self):
        if not (0.0 < self.fov_half_angle <= math.pi / 2):
            raise ValueError("fov_half_angle must be in (0, pi/2]")

    def contains(self, p: Vec3) -> bool:
        r = p.norm()
        if r <= MIN_RANGE_M:
            return False
        # Angle from the +z boresight.
        off_axis = math.acos(max(-1.0, min(1.0, p.z / r)))
        return off_axis <= self.fov_half_angle


def _perpendicular_basis(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors spanning the plane perpendicular to ``direction``."""
    helper = np.array([0.0, 1.0, 0.0]) if abs(direction[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(direction, helper)
    u /= np.linalg.norm(u)
    v = np.cross(direction, u)
    return u, v


def _lowpass(samples: np.ndarray, dt: float, cutoff_hz: float) -> np.ndarray:
    """Single-pole forward low-pass along axis 0."""
    rc = 1.0 / (2.0 * math.pi * cutoff_hz)
    alpha = dt / (rc + dt)
    out = np.empty_like(samples)
    out[0] = samples[0]
    for k in range(1, samples.shape[0]):
        out[k] = out[k - 1] + alpha * (samples[k] - out[k - 1])
    return out


def generate_gesture(
    spec: GestureSpec,
    noise: NoiseModel,
    anchor: AnchorModel = AnchorModel(),
) -> tuple[Trajectory, list[UwbReading]]:
    """Simulate one pointing gesture.

    Returns the ground-truth trajectory (straight line along the executed
    axis plus band-limited hand tremor) and the noisy readings the anchor
    would report for it.  The RNG draw order is fixed (wander, jitter,
    biases, reading noise) so that changing one sigma never reshuffles the
    noise realizations of the others.
    """
    rng = np.random.default_rng(noise.seed)
    n = spec.sample_count()
    dt = 1.0 / spec.sample_rate
    times = np.arange(n, dtype=float) * dt

    direction = spec.direction.as_array()
    u, v = _perpendicular_basis(direction)

    # Executed axis: nominal direction tilted by the per-gesture aim error.
    wander = rng.standard_normal(2) * spec.axis_wander
    executed = direction + wander[0] * u + wander[1] * v
    depth_draw = float(rng.standard_normal()) * spec.depth_wander
    start_arr = spec.start.as_array()
    radial_norm = np.linalg.norm(start_arr)
    if radial_norm > 0.0:
        # Depth-aim error tilts the axis toward/away from the anchor; it
        # fades out for already-radial gestures (no lateral reference).
        radial = start_arr / radial_norm
        radial_perp = radial - (radial @ direction) * direction
        executed = executed + depth_draw * radial_perp
    executed /= np.linalg.norm(executed)

    along = spec.speed * times
    truth_positions = spec.start.as_array()[None, :] + along[:, None] * executed[None, :]

    # Hand tremor: low-pass filtered perpendicular wobble, rescaled so its
    # RMS equals jitter_amplitude.
    jitter_draws = rng.standard_normal((n, 2)) * spec.jitter_amplitude
    if spec.jitter_amplitude > 0.0 and n > 1:
        filtered = _lowpass(jitter_draws, dt, JITTER_CUTOFF_HZ)
        filtered -= filtered.mean(axis=0)
        rms = float(np.sqrt(np.mean(filtered**2)))
        if rms > 0.0:
            filtered *= spec.jitter_amplitude / rms
        ju, jv = _perpendicular_basis(executed)
        truth_positions = truth_positions + filtered[:, 0:1] * ju[None, :] + filtered[:, 1:2] * jv[None, :]

    for idx in range(n):
        p = Vec3.from_array(truth_positions[idx])
        if not anchor.contains(p):
            raise OutOfFovError(
                f"true path leaves the usable zone at sample {idx} "
                f"(range {p.norm():.3f} m, fov half-angle "
                f"{math.degrees(anchor.fov_half_angle):.1f} deg)",
                sample_index=idx,
            )

    truth = Trajectory(times=times, positions=truth_positions)

    bias_draws = rng.standard_normal(2)
    bias_az = bias_draws[0] * noise.bias_azimuth
    bias_el = bias_draws[1] * noise.bias_elevation

    noise_draws = rng.standard_normal((n, 3))
    d, az, el = cartesian_to_spherical_array(truth_positions)
    d = d + noise_draws[:, 0] * noise.sigma_distance
    az = az + noise_draws[:, 1] * noise.sigma_azimuth + bias_az
    el = el + noise_draws[:, 2] * noise.sigma_elevation + bias_el

    d = np.maximum(d, 1e-6)
    az = np.mod(az + math.pi, 2.0 * math.pi) - math.pi
    az = np.where(az <= -math.pi, math.pi, az)
    el = np.clip(el, -math.pi / 2, math.pi / 2)

    readings = [
        UwbReading(distance=float(d[k]), azimuth=float(az[k]),
                   elevation=float(el[k]), timestamp=float(times[k]))
        for k in range(n)
    ]
    return truth, readings


@dataclass(frozen=True)
class PerDeviceSeries:
    """Baseline selector inputs derived from a ground-truth trajectory."""

    distances: dict[str, list[tuple[float, float]]]  # id -> [(t, meters)]
    aoas: dict[str, list[float]]                     # id -> [radians]


def per_device_series(
    truth: Trajectory,
    devices,
    noise: NoiseModel,
) -> PerDeviceSeries:
    """Per-device distance and AoA feeds for the baseline selectors.

    These feeds assume dedicated per-device ranging hardware, which the
    single-anchor deployment deliberately lacks: they exist purely so the
    baselines can be compared in simulation.  ``devices`` is any iterable
    of objects with ``id`` and ``position`` attributes.  The AoA of a
    device is the angle between the user device's boresight (its motion
    direction) and the direction from the user device to that device.
    """
    rng = np.random.default_rng([noise.seed, 0x5E1EC])
    positions = truth.positions
    net = positions[-1] - positions[0]
    norm = np.linalg.norm(net)
    if norm == 0.0:
        raise DegenerateGeometryError("trajectory has zero net displacement")
    boresight = net / norm

    distances: dict[str, list[tuple[float, float]]] = {}
    aoas: dict[str, list[float]] = {}
    for dev in devices:
        p_d = dev.position.as_array()
        offsets = p_d[None, :] - positions
        dists = np.linalg.norm(offsets, axis=1)
        if np.any(dists < 1e-6):
            raise DegenerateGeometryError(f"device {dev.id} coincides with the path")
        dist_noisy = dists + rng.standard_normal(len(dists)) * noise.sigma_distance
        cosines = np.clip((offsets / dists[:, None]) @ boresight, -1.0, 1.0)
        aoa = np.arccos(cosines) + rng.standard_normal(len(dists)) * noise.sigma_azimuth
        distances[dev.id] = [(float(t), float(x)) for t, x in zip(truth.times, dist_noisy)]
        aoas[dev.id] = [float(a) for a in aoa]
    return PerDeviceSeries(distances=distances, aoas=aoas)


def theoretical_resolution(distance: float, accuracy: float) -> float:
    """Minimum separable device spacing at range ``distance``.

    Two devices closer than distance * tan(accuracy) subtend less than
    the direction-estimation accuracy and cannot be told apart.
    """
    if distance <= 0:
        raise ValueError("distance must be > 0")
    if not (0.0 < accuracy < math.pi / 2):
        raise ValueError("accuracy must be in (0, pi/2)")
    return distance * math.tan(accuracy)
