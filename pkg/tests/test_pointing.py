import math

import numpy as np
import pytest

from pointsel.errors import (
    GestureTooShortError,
    InsufficientDataError,
    NonMonotoneTimestampsError,
)
from pointsel.geom import Vec3, angle_between, cartesian_to_spherical
from pointsel.pointing import (
    KalmanConfig,
    Trajectory,
    estimate_direction,
    estimate_pointing,
    gesture_quality,
    smooth_trajectory,
)
from pointsel.simkit import AnchorModel, GestureSpec, NoiseModel, generate_gesture

RATE = 55.0


def line_readings(start, velocity, n=110, noise_sigma=0.0, rng=None):
    readings = []
    for k in range(n):
        t = k / RATE
        p = Vec3(
            start[0] + velocity[0] * t,
            start[1] + velocity[1] * t,
            start[2] + velocity[2] * t,
        )
        if noise_sigma > 0.0:
            arr = p.as_array() + rng.standard_normal(3) * noise_sigma
            p = Vec3.from_array(arr)
        readings.append(cartesian_to_spherical(p, timestamp=t))
    return readings


def line_trajectory(p0, p1, n=20):
    times = np.linspace(0.0, 1.0, n)
    positions = np.outer(1.0 - times, np.asarray(p0)) + np.outer(times, np.asarray(p1))
    return Trajectory(times=times, positions=positions)


class TestSmoothTrajectory:
    def test_noiseless_line_converges_fast(self):
        readings = line_readings((0.0, 0.0, 5.0), (0.1, 0.0, 0.0))
        traj = smooth_trajectory(readings)
        assert len(traj) == len(readings)
        for k in range(5, len(readings)):
            truth = np.array([0.1 * k / RATE, 0.0, 5.0])
            assert np.linalg.norm(traj.positions[k] - truth) < 1e-3

    def test_stationary_readings_stay_put(self):
        readings = line_readings((1.0, 0.5, 4.0), (0.0, 0.0, 0.0), n=40)
        traj = smooth_trajectory(readings)
        truth = np.array([1.0, 0.5, 4.0])
        assert np.linalg.norm(traj.positions - truth, axis=1).max() < 1e-6

    def test_smoothing_beats_raw_noise(self):
        # Matched measurement noise: the filter should win essentially always.
        rng = np.random.default_rng(11)
        wins = 0
        for _ in range(100):
            n = 110
            truth = np.stack(
                [0.1 * np.arange(n) / RATE, np.zeros(n), np.full(n, 5.0)], axis=1
            )
            readings = []
            noisy = truth + rng.standard_normal(truth.shape) * 0.05
            for k in range(n):
                readings.append(cartesian_to_spherical(Vec3.from_array(noisy[k]), timestamp=k / RATE))
            traj = smooth_trajectory(readings)
            rms_raw = float(np.sqrt(np.mean((noisy - truth) ** 2)))
            rms_smooth = float(np.sqrt(np.mean((traj.positions - truth) ** 2)))
            if rms_smooth < rms_raw:
                wins += 1
        assert wins >= 95

    def test_too_few_readings(self):
        readings = line_readings((0, 0, 5), (0.1, 0, 0), n=1)
        with pytest.raises(InsufficientDataError):
            smooth_trajectory(readings)

    def test_non_monotone_timestamps(self):
        readings = line_readings((0, 0, 5), (0.1, 0, 0), n=10)
        bad = readings[:5] + [readings[3]] + readings[5:]
        with pytest.raises(NonMonotoneTimestampsError):
            smooth_trajectory(bad)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            KalmanConfig(process_noise_accel=0.0)
        with pytest.raises(ValueError):
            KalmanConfig(measurement_noise=-1.0)


class TestEstimateDirection:
    def test_noiseless_line_exact(self):
        traj = line_trajectory((0.0, 0.0, 2.0), (0.2, 0.0, 2.0))
        ray = estimate_direction(traj)
        assert angle_between(ray.direction, Vec3(1, 0, 0)) < 1e-9
        assert abs(ray.explained_variance_ratio - 1.0) < 1e-12
        assert abs(ray.net_displacement - 0.2) < 1e-12

    def test_reversed_order_negates_direction(self):
        forward = estimate_direction(line_trajectory((0, 0, 2), (0.2, 0, 2)))
        backward = estimate_direction(line_trajectory((0.2, 0, 2), (0, 0, 2)))
        assert angle_between(backward.direction, Vec3(-1, 0, 0)) < 1e-9
        flipped = Vec3(-forward.direction.x, -forward.direction.y, -forward.direction.z)
        assert angle_between(backward.direction, flipped) < 1e-9

    def test_jittered_line_within_three_degrees(self):
        rng = np.random.default_rng(123)
        true_dir = Vec3(1, 1, 0).normalized()
        hits = 0
        for _ in range(100):
            n = 20
            along = np.linspace(0.0, 0.2, n)
            positions = np.array([2.0, 0.0, 3.0])[None, :] + along[:, None] * true_dir.as_array()[None, :]
            positions = positions + rng.standard_normal(positions.shape) * 0.005
            traj = Trajectory(times=np.arange(n) / RATE, positions=positions)
            ray = estimate_direction(traj)
            if angle_between(ray.direction, true_dir) < math.radians(3.0):
                hits += 1
        assert hits >= 95

    def test_translation_invariance(self):
        rng = np.random.default_rng(9)
        base = line_trajectory((0, 0, 2), (0.2, 0.05, 2.1), n=25)
        noisy = base.positions + rng.standard_normal(base.positions.shape) * 0.002
        t1 = Trajectory(times=base.times, positions=noisy)
        t2 = Trajectory(times=base.times, positions=noisy + np.array([10.0, -4.0, 2.0]))
        d1 = estimate_direction(t1).direction
        d2 = estimate_direction(t2).direction
        assert angle_between(d1, d2) < 1e-9

    def test_speed_scaling_invariance(self):
        base = line_trajectory((0, 0, 2), (0.2, 0.05, 2.1), n=25)
        slow = Trajectory(times=base.times * 10.0, positions=base.positions)
        d1 = estimate_direction(base).direction
        d2 = estimate_direction(slow).direction
        assert angle_between(d1, d2) == 0.0

    def test_too_few_samples(self):
        with pytest.raises(InsufficientDataError):
            estimate_direction(line_trajectory((0, 0, 2), (0.2, 0, 2), n=7))

    def test_below_hard_displacement_floor(self):
        with pytest.raises(GestureTooShortError):
            estimate_direction(line_trajectory((0, 0, 2), (0.02, 0, 2), n=20))

    def test_error_decreasing_in_displacement_at_default_noise(self):
        # At the stock simulator noise the error is i.i.d.-dominated and
        # falls steeply with displacement.
        anchor = AnchorModel()
        medians = []
        for L in (0.05, 0.10, 0.15, 0.20, 0.25, 0.30):
            errors = []
            for k in range(150):
                spec = GestureSpec(Vec3(0, 0, 5), Vec3(1, 0, 0), L, 0.1)
                _, readings = generate_gesture(spec, NoiseModel(seed=50_000 + k), anchor)
                try:
                    ray = estimate_pointing(readings)
                except GestureTooShortError:
                    continue
                errors.append(angle_between(ray.direction, Vec3(1, 0, 0)))
            medians.append(float(np.median(errors)))
        assert all(b < a for a, b in zip(medians, medians[1:]))

    def test_error_non_increasing_in_displacement(self, calibrated_scenario):
        # Longer gestures never estimate worse; trend mirrors the published
        # displacement curve.  Uses the calibrated profile.
        anchor = AnchorModel()
        sc = calibrated_scenario
        medians = []
        for L in (0.05, 0.10, 0.15, 0.20, 0.25, 0.30):
            errors = []
            for k in range(150):
                spec = GestureSpec(
                    Vec3(0, 0, 5), Vec3(1, 0, 0), L, 0.1,
                    jitter_amplitude=sc.gesture.jitter_amplitude,
                    axis_wander=sc.gesture.axis_wander,
                    depth_wander=sc.gesture.depth_wander,
                )
                _, readings = generate_gesture(spec, sc.noise.with_seed(40_000 + k), anchor)
                try:
                    ray = estimate_pointing(readings)
                except GestureTooShortError:
                    continue
                errors.append(angle_between(ray.direction, Vec3(1, 0, 0)))
            medians.append(float(np.median(errors)))
        # Allow sampling slack between neighbours, require the 5 cm cell to
        # dominate and the overall trend to point down.
        assert medians[0] > medians[1] > medians[-1] * 0.9
        for a, b in zip(medians, medians[1:]):
            assert b <= a * 1.15


class TestGestureQuality:
    def test_clean_long_line_unflagged(self):
        ray = estimate_direction(line_trajectory((0, 0, 2), (0.2, 0, 2)))
        report = gesture_quality(ray)
        assert report.ok
        assert report.flags == ()

    def test_short_gesture_flagged(self):
        ray = estimate_direction(line_trajectory((0, 0, 2), (0.06, 0, 2)))
        report = gesture_quality(ray)
        assert report.too_short
        assert not report.low_linearity

    def test_arc_flagged_low_linearity(self):
        # Half-circle of radius 5 cm: PC1 explains ~84% of the variance.
        theta = np.linspace(0.0, math.pi, 30)
        positions = np.stack(
            [0.05 * np.cos(theta), 0.05 * np.sin(theta), np.full_like(theta, 2.0)], axis=1
        )
        traj = Trajectory(times=theta, positions=positions)
        ray = estimate_direction(traj)
        # Independent oracle for the variance ratio.
        centered = positions - positions.mean(axis=0)
        eigs = np.linalg.eigvalsh(centered.T @ centered / len(theta))
        assert abs(ray.explained_variance_ratio - eigs[-1] / eigs.sum()) < 1e-12
        assert ray.explained_variance_ratio < 0.9
        assert gesture_quality(ray).low_linearity
