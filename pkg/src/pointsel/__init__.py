"""Single-anchor UWB pointing: localization, direction estimation,
two-pointing device registration, and direction-matching device selection,
plus a synthetic anchor, an experiment harness, and a session gateway."""

from .geom import (
    Ray,
    UwbReading,
    Vec3,
    angle_between,
    cartesian_to_spherical,
    nearest_point_between_rays,
    spherical_to_cartesian,
)
from .pointing import (
    KalmanConfig,
    PointingRay,
    QualityReport,
    Trajectory,
    estimate_direction,
    estimate_pointing,
    gesture_quality,
    smooth_trajectory,
)
from .registry import (
    DeviceCatalog,
    DeviceRecord,
    GuidanceNeeded,
    RegistrationAttempt,
    list_devices,
    perturbation_sensitivity,
    register_device,
    remove_device,
    solve_two_ray_position,
    update_device,
    user_separation_check,
)
from .scenario import Box, GestureModel, Scenario, load_scenario, save_scenario
from .selector import (
    Ambiguous,
    BaselineResult,
    SelectionResult,
    baseline_aoa,
    baseline_distance_change,
    score_device,
    select,
)
from .simkit import (
    AnchorModel,
    GestureSpec,
    NoiseModel,
    generate_gesture,
    per_device_series,
    theoretical_resolution,
)
from .sweeps import (
    ExperimentReport,
    calibrate,
    run_direction_sweep,
    run_registration_sweep,
    run_resolution_sweep,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
