"""Experiment harness: deterministic Monte-Carlo sweeps over the pipeline.

Each sweep reproduces one benchmark axis (pointing direction, user
location, gesture displacement/velocity, two-device spatial resolution,
two-pointing registration) as a grid of cells.  Every cell derives its
RNG stream from (master seed, cell index, trial index), so cells are
independent, reruns are byte-identical, and parallel execution could
never change results.

Calibration.  Published figures for this problem report end-to-end
direction error, not sensor noise, so the harness carries a reference
noise *shape* (relative magnitudes of ranging noise, angle noise,
per-gesture angle biases, hand tremor, and aim wander, reflecting how
commodity UWB hardware behaves: cm-level ranging, degree-level slowly
varying angle biases, elevation worse than azimuth) and fits a single
scale factor so that the standard benchmark geometry (5 m range, 20 cm
gesture at 0.1 m/s) reaches a target median direction error.  The fitted
values are stored in the scenario file, never hard-coded as truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    GestureTooShortError,
    InsufficientDataError,
    OutOfFovError,
    ParallelRaysError,
)
from .geom import Vec3, angle_between, rad_to_deg
from .pointing import KalmanConfig, PointingRay, estimate_pointing
from .registry import DeviceRecord, solve_two_ray_position
from .scenario import CalibrationInfo, GestureModel, Scenario
from .selector import select
from .simkit import GestureSpec, NoiseModel, generate_gesture, theoretical_resolution

# Standard benchmark gesture (the 5 m / 20 cm / 0.1 m/s setup).
STANDARD_RANGE_M = 5.0
STANDARD_DISPLACEMENT_M = 0.2
STANDARD_SPEED_MPS = 0.1

DEFAULT_GRIDS = {
    "direction": [float(a) for a in range(0, 360, 10)],          # degrees in the x-y plane
    "distance": [1.0, 2.0, 3.0, 4.0, 5.0],                       # meters from the anchor
    "angle": [float(a) for a in range(-50, 51, 10)],             # degrees off boresight
    "displacement": [0.05, 0.10, 0.15, 0.20, 0.25, 0.30],        # meters
    "velocity": [0.1, 0.2, 0.3, 0.4, 0.5],                       # m/s
}

# Reference noise shape for calibration (scaled as one unit).  The split
# reflects how commodity UWB hardware behaves: ranging is tight, fast
# angle noise is small after smoothing, but the arrival angles carry
# slowly varying biases (multipath and device-pose dependent, effectively
# constant over one gesture) that dominate the error budget, and human aim
# wanders a little off the intended axis.
CALIBRATION_SHAPE_NOISE = NoiseModel(
    sigma_distance=0.0025,
    sigma_azimuth=math.radians(0.05),
    sigma_elevation=math.radians(0.05),
    seed=0,
    bias_azimuth=math.radians(1.0),
    bias_elevation=math.radians(0.1),
)
CALIBRATION_SHAPE_GESTURE = GestureModel(
    jitter_amplitude=0.0005,
    axis_wander=math.radians(0.6),
    depth_wander=math.radians(3.2),
)

DEFAULT_CALIBRATION_TARGET_DEG = 2.33


def _scaled_gesture_model(scale: float) -> GestureModel:
    return GestureModel(
        jitter_amplitude=CALIBRATION_SHAPE_GESTURE.jitter_amplitude * scale,
        axis_wander=CALIBRATION_SHAPE_GESTURE.axis_wander * scale,
        depth_wander=CALIBRATION_SHAPE_GESTURE.depth_wander * scale,
    )

RESOLUTION_CRITERION = 0.90
RESOLUTION_FLOOR_M = 0.005
RESOLUTION_MAX_STEPS = 20


@dataclass(frozen=True)
class ExperimentReport:
    experiment: str
    axis: str
    seed: int
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def to_csv(self) -> str:
        def fmt(v):
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return repr(v)
            return str(v)

        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def cell(self, value) -> dict:
        for row in self.rows:
            if row[self.columns.index("cell")] == value:
                return dict(zip(self.columns, row))
        raise KeyError(f"no cell {value!r} in report")


def nearest_rank(values, percentile: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * N)-th smallest value."""
    data = sorted(values)
    if not data:
        raise ValueError("no values")
    rank = math.ceil(percentile / 100.0 * len(data))
    return data[max(0, min(len(data), rank)) - 1]


def _trial_seed(master: int, *path: int) -> int:
    return int(np.random.SeedSequence([master & 0xFFFFFFFF, *path]).generate_state(1)[0])


def _gesture_spec(scenario: Scenario, start: Vec3, direction: Vec3,
                  displacement: float, speed: float) -> GestureSpec:
    return GestureSpec(
        start=start,
        direction=direction,
        displacement=displacement,
        speed=speed,
        jitter_amplitude=scenario.gesture.jitter_amplitude,
        axis_wander=scenario.gesture.axis_wander,
        depth_wander=scenario.gesture.depth_wander,
    )


def _run_pipeline(scenario: Scenario, spec: GestureSpec, seed: int,
                  cfg: KalmanConfig = KalmanConfig()) -> PointingRay:
    noise = scenario.noise.with_seed(seed)
    _, readings = generate_gesture(spec, noise, scenario.anchor)
    return estimate_pointing(readings, cfg)


def _nominal_path_visible(scenario: Scenario, start: Vec3, direction: Vec3,
                          displacement: float) -> bool:
    """Whether the undisturbed straight path stays in the anchor's usable zone."""
    steps = 16
    for k in range(steps + 1):
        p = start + direction.scaled(displacement * k / steps)
        if not scenario.anchor.contains(p):
            return False
    return True


def _direction_cell_geometry(axis: str, value: float) -> tuple[Vec3, Vec3, float, float]:
    """(start, nominal direction, displacement, speed) for one sweep cell."""
    if axis == "direction":
        # Full 360 degrees in the plane facing the anchor, at the standard range.
        alpha = math.radians(value)
        return (
            Vec3(0.0, 0.0, STANDARD_RANGE_M),
            Vec3(math.cos(alpha), math.sin(alpha), 0.0),
            STANDARD_DISPLACEMENT_M,
            STANDARD_SPEED_MPS,
        )
    if axis == "distance":
        return (
            Vec3(0.0, 0.0, float(value)),
            Vec3(1.0, 0.0, 0.0),
            STANDARD_DISPLACEMENT_M,
            STANDARD_SPEED_MPS,
        )
    if axis == "angle":
        psi = math.radians(value)
        start = Vec3(STANDARD_RANGE_M * math.sin(psi), 0.0, STANDARD_RANGE_M * math.cos(psi))
        direction = Vec3(math.cos(psi), 0.0, -math.sin(psi))
        return (start, direction, STANDARD_DISPLACEMENT_M, STANDARD_SPEED_MPS)
    if axis == "displacement":
        return (
            Vec3(0.0, 0.0, STANDARD_RANGE_M),
            Vec3(1.0, 0.0, 0.0),
            float(value),
            STANDARD_SPEED_MPS,
        )
    if axis == "velocity":
        return (
            Vec3(0.0, 0.0, STANDARD_RANGE_M),
            Vec3(1.0, 0.0, 0.0),
            STANDARD_DISPLACEMENT_M,
            float(value),
        )
    raise ValueError(f"unknown sweep axis {axis!r}")


def run_direction_sweep(
    scenario: Scenario,
    axis: str = "direction",
    grid: list[float] | None = None,
    trials: int = 100,
    seed: int | None = None,
) -> ExperimentReport:
    """Median/90th-percentile direction error per grid cell.

    Cells whose nominal geometry leaves the anchor's usable zone are
    reported as skipped with the reason instead of failing the sweep.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    grid = list(DEFAULT_GRIDS[axis]) if grid is None else list(grid)
    if not grid:
        raise ValueError("grid must be non-empty")
    master = scenario.noise.seed if seed is None else seed

    rows = []
    for cell_idx, value in enumerate(grid):
        start, direction, displacement, speed = _direction_cell_geometry(axis, value)
        spec = _gesture_spec(scenario, start, direction, displacement, speed)
        errors_deg: list[float] = []
        status = "ok"
        if not _nominal_path_visible(scenario, start, direction, displacement):
            status = "skipped: nominal path outside the anchor's usable zone"
        else:
            rejected = 0
            for trial in range(trials):
                try:
                    ray = _run_pipeline(scenario, spec, _trial_seed(master, cell_idx, trial))
                except (GestureTooShortError, InsufficientDataError, OutOfFovError):
                    # Unusable gesture under this noise draw; a live system
                    # would ask the user to redo it.
                    rejected += 1
                    continue
                errors_deg.append(rad_to_deg(angle_between(ray.direction, direction)))
            if rejected and not errors_deg:
                status = f"skipped: all {rejected} trials rejected"
        if errors_deg:
            median = nearest_rank(errors_deg, 50.0)
            p90 = nearest_rank(errors_deg, 90.0)
        else:
            median = p90 = float("nan")
        rows.append((f"{axis}-sweep", axis, master, float(value), len(errors_deg),
                     median, p90, status))

    return ExperimentReport(
        experiment=f"{axis}-sweep",
        axis=axis,
        seed=master,
        columns=("experiment", "axis", "seed", "cell", "trials",
                 "median_deg", "p90_deg", "status"),
        rows=tuple(rows),
    )


def pooled_direction_median(
    scenario: Scenario,
    trials: int,
    seed: int,
    grid: list[float] | None = None,
) -> float:
    """Median direction error pooled over all direction-sweep cells."""
    grid = list(DEFAULT_GRIDS["direction"]) if grid is None else list(grid)
    errors: list[float] = []
    for cell_idx, value in enumerate(grid):
        start, direction, displacement, speed = _direction_cell_geometry("direction", value)
        spec = _gesture_spec(scenario, start, direction, displacement, speed)
        for trial in range(trials):
            try:
                ray = _run_pipeline(scenario, spec, _trial_seed(seed, cell_idx, trial))
            except (GestureTooShortError, InsufficientDataError):
                continue
            errors.append(rad_to_deg(angle_between(ray.direction, direction)))
    return nearest_rank(errors, 50.0)


def _selection_accuracy(
    scenario: Scenario,
    range_m: float,
    separation: float,
    trials: int,
    master: int,
    cell_idx: int,
    step: int,
) -> float:
    """Two-device selection accuracy at one (range, separation) point.

    Geometry mirrors the two-item resolution benchmark: the user stands at
    the standard anchor range, the two items sit ``range_m`` away along
    the facing plane, stacked perpendicular to the pointing direction
    (same range and azimuth from the anchor, so only the separation
    varies).  Trials alternate which item is the target; a trial counts
    as correct when the top-ranked device is the target.
    """
    start = Vec3(0.0, 0.0, STANDARD_RANGE_M)
    base = np.array([range_m, 0.0, STANDARD_RANGE_M])
    offset = np.array([0.0, separation / 2.0, 0.0])
    device_a = DeviceRecord(id="a", label="item a", position=Vec3.from_array(base + offset))
    device_b = DeviceRecord(id="b", label="item b", position=Vec3.from_array(base - offset))
    catalog = [device_a, device_b]

    correct = 0
    completed = 0
    for trial in range(trials):
        target = device_a if trial % 2 == 0 else device_b
        aim = (target.position - start).normalized()
        spec = _gesture_spec(scenario, start, aim,
                             STANDARD_DISPLACEMENT_M, STANDARD_SPEED_MPS)
        try:
            ray = _run_pipeline(scenario, spec, _trial_seed(master, cell_idx, step, trial))
        except (GestureTooShortError, InsufficientDataError):
            continue
        completed += 1
        result = select(ray, catalog)
        if result.ranked[0][0] == target.id:
            correct += 1
    return correct / completed if completed else 0.0


def run_resolution_sweep(
    scenario: Scenario,
    ranges: list[float] | None = None,
    trials: int = 200,
    seed: int | None = None,
    criterion: float = RESOLUTION_CRITERION,
    accuracy_reference_deg: float = 2.36,
    max_steps: int = RESOLUTION_MAX_STEPS,
) -> ExperimentReport:
    """Bisect, per range, the two-device separation where accuracy crosses
    the criterion; report it next to the theoretical d*tan(accuracy) curve."""
    ranges = [1.0, 2.0, 3.0, 4.0, 5.0] if ranges is None else list(ranges)
    if any(r <= 0 for r in ranges):
        raise ValueError("ranges must be positive")
    master = scenario.noise.seed if seed is None else seed
    eps = math.radians(accuracy_reference_deg)

    rows = []
    for cell_idx, range_m in enumerate(ranges):
        theory = theoretical_resolution(range_m, eps)
        lo = 0.0
        hi = max(4.0 * theory, 0.04)
        steps = 0
        # Grow the bracket until the criterion holds at the top.
        while steps < max_steps and _selection_accuracy(
                scenario, range_m, hi, trials, master, cell_idx, steps) < criterion:
            lo = hi
            hi *= 2.0
            steps += 1
        converged = steps < max_steps
        while converged and steps < max_steps and (hi - lo) > RESOLUTION_FLOOR_M:
            mid = 0.5 * (lo + hi)
            acc = _selection_accuracy(scenario, range_m, mid, trials, master, cell_idx, steps)
            if acc >= criterion:
                hi = mid
            else:
                lo = mid
            steps += 1
        converged = converged and (hi - lo) <= RESOLUTION_FLOOR_M
        empirical = 0.5 * (lo + hi)
        rows.append(("resolution-sweep", "range", master, float(range_m), trials,
                     empirical, theory, steps, converged))

    return ExperimentReport(
        experiment="resolution-sweep",
        axis="range",
        seed=master,
        columns=("experiment", "axis", "seed", "cell", "trials_per_step",
                 "empirical_m", "theoretical_m", "steps", "converged"),
        rows=tuple(rows),
    )


# Registration benchmark geometry: a device in front of the anchor and two
# user positions at equal distance from it, placed symmetrically in the
# horizontal plane so the two pointing directions meet at exactly the cell
# angle.  Everything stays inside the field of view for cell angles up to
# ~45 degrees.
REGISTRATION_DEVICE = Vec3(0.3, 0.2, 1.2)
REGISTRATION_USER_RANGE_M = 1.0
_REGISTRATION_BASE = Vec3(-0.35, 0.2, -0.5)


def registration_cell_geometry(angle: float) -> tuple[Vec3, Vec3, Vec3]:
    """(device, user1, user2) with pointing directions ``angle`` apart."""
    device = REGISTRATION_DEVICE
    w = (device - _REGISTRATION_BASE).normalized()  # horizontal: same y
    half = angle / 2.0
    users = []
    for sign in (1.0, -1.0):
        c, s = math.cos(sign * half), math.sin(sign * half)
        rotated = Vec3(w.x * c + w.z * s, w.y, -w.x * s + w.z * c)
        users.append(device - rotated.scaled(REGISTRATION_USER_RANGE_M))
    return device, users[0], users[1]


def run_registration_sweep(
    scenario: Scenario,
    angles_deg: list[float] | None = None,
    trials: int = 200,
    seed: int | None = None,
) -> ExperimentReport:
    """Mean two-pointing registration error per direction-angle-difference cell.

    Uses the unguarded triangulation so that sub-threshold angles can be
    measured (that instability is exactly what the sweep demonstrates).
    """
    angles_deg = [5.0, 10.0, 20.0, 30.0] if angles_deg is None else list(angles_deg)
    master = scenario.noise.seed if seed is None else seed

    rows = []
    for cell_idx, angle_deg in enumerate(angles_deg):
        device, user1, user2 = registration_cell_geometry(math.radians(angle_deg))
        errors = []
        skipped = 0
        for trial in range(trials):
            try:
                rays = []
                for leg, user in enumerate((user1, user2)):
                    aim = (device - user).normalized()
                    spec = _gesture_spec(scenario, user, aim,
                                         STANDARD_DISPLACEMENT_M, STANDARD_SPEED_MPS)
                    rays.append(_run_pipeline(
                        scenario, spec, _trial_seed(master, cell_idx, trial, leg)))
                solution = solve_two_ray_position(rays[0], rays[1])
            except (GestureTooShortError, InsufficientDataError, ParallelRaysError):
                skipped += 1
                continue
            errors.append(solution.position.distance_to(device))
        mean_error = float(np.mean(errors)) if errors else float("nan")
        rows.append(("registration-sweep", "angle", master, float(angle_deg),
                     len(errors), mean_error, skipped))

    return ExperimentReport(
        experiment="registration-sweep",
        axis="angle",
        seed=master,
        columns=("experiment", "axis", "seed", "cell", "trials",
                 "mean_error_m", "skipped"),
        rows=tuple(rows),
    )


def calibrate(
    scenario: Scenario,
    target_median_deg: float = DEFAULT_CALIBRATION_TARGET_DEG,
    trials_per_cell: int = 40,
    seed: int | None = None,
    max_iterations: int = 18,
) -> Scenario:
    """Fit the noise profile so the standard geometry hits the target median.

    Bisects a single scale factor applied to the reference shape (the
    pooled median is monotone in it) and writes the fitted profile plus a
    calibration record back into the scenario.  Returns the scenario (the
    same object, mutated) for convenience.
    """
    if target_median_deg <= 0:
        raise ValueError("target_median_deg must be > 0")
    master = scenario.noise.seed if seed is None else seed

    def evaluate(scale: float) -> float:
        # Probe scenario: same anchor and room, scaled shape.
        probe = Scenario(
            name=scenario.name,
            anchor=scenario.anchor,
            room=scenario.room,
            noise=CALIBRATION_SHAPE_NOISE.scaled(scale).with_seed(master),
            gesture=_scaled_gesture_model(scale),
        )
        return pooled_direction_median(probe, trials=trials_per_cell, seed=master)

    lo, hi = 0.05, 6.0
    f_lo, f_hi = evaluate(lo), evaluate(hi)
    if not (f_lo < target_median_deg < f_hi):
        # Target outside the bracket; clamp to the nearer end.
        scale = lo if abs(f_lo - target_median_deg) < abs(f_hi - target_median_deg) else hi
    else:
        for _ in range(max_iterations):
            mid = math.sqrt(lo * hi)
            if evaluate(mid) < target_median_deg:
                lo = mid
            else:
                hi = mid
            if hi / lo < 1.01:
                break
        scale = math.sqrt(lo * hi)

    achieved = evaluate(scale)
    scenario.noise = CALIBRATION_SHAPE_NOISE.scaled(scale).with_seed(scenario.noise.seed)
    scenario.gesture = _scaled_gesture_model(scale)
    scenario.calibration = CalibrationInfo(
        target_median_deg=target_median_deg,
        achieved_median_deg=achieved,
        scale=scale,
        trials=trials_per_cell,
        seed=master,
    )
    return scenario
