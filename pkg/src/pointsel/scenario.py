"""Scenario documents: anchor, room, noise, gesture model, device catalog.

Persisted as versioned JSON (format_version 1).  File values use meters
and degrees for human readability; the in-memory structures keep radians.
Positions round-trip bit-exactly (no unit conversion); angles round-trip
within one float ulp, and a written file re-reads to a byte-identical
re-write, so save/load is a fixed point after one cycle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, UnsupportedVersionError
from .geom import Vec3, deg_to_rad, rad_to_deg
from .registry import DeviceCatalog, DeviceRecord
from .simkit import AnchorModel, NoiseModel

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Box:
    """Axis-aligned room bounds, meters."""

    min_corner: Vec3
    max_corner: Vec3

    def __post_init__(self):
        if not (self.min_corner.x < self.max_corner.x
                and self.min_corner.y < self.max_corner.y
                and self.min_corner.z < self.max_corner.z):
            raise ValueError("room bounds must have min < max on every axis")

    def contains(self, p: Vec3) -> bool:
        return (self.min_corner.x <= p.x <= self.max_corner.x
                and self.min_corner.y <= p.y <= self.max_corner.y
                and self.min_corner.z <= p.z <= self.max_corner.z)


DEFAULT_ROOM = Box(Vec3(-3.0, -1.5, 0.0), Vec3(3.0, 1.5, 6.0))


@dataclass(frozen=True)
class GestureModel:
    """Gesture-shape parameters used when the harness synthesizes gestures."""

    jitter_amplitude: float = 0.003
    axis_wander: float = 0.0
    depth_wander: float = 0.0

    def __post_init__(self):
        if self.jitter_amplitude < 0 or self.axis_wander < 0 or self.depth_wander < 0:
            raise ValueError("gesture model parameters must be >= 0")


@dataclass(frozen=True)
class CalibrationInfo:
    """Record of a noise calibration run (stored, never hard-coded)."""

    target_median_deg: float
    achieved_median_deg: float
    scale: float
    trials: int
    seed: int


@dataclass
class Scenario:
    name: str = "scenario"
    anchor: AnchorModel = field(default_factory=AnchorModel)
    room: Box = DEFAULT_ROOM
    noise: NoiseModel = field(default_factory=NoiseModel)
    gesture: GestureModel = field(default_factory=GestureModel)
    catalog: DeviceCatalog = field(default_factory=DeviceCatalog)
    calibration: CalibrationInfo | None = None

    @property
    def devices(self) -> list[DeviceRecord]:
        return self.catalog.list()

    def add_device(self, record: DeviceRecord) -> None:
        if not self.room.contains(record.position):
            raise ValueError(
                f"device {record.id!r} at {record.position.as_tuple()} "
                "lies outside the room bounds"
            )
        self.catalog.add(record)


def _device_to_json(dev: DeviceRecord) -> dict:
    return {
        "id": dev.id,
        "label": dev.label,
        "position_m": [dev.position.x, dev.position.y, dev.position.z],
        "registered_at_s": dev.registered_at,
        "registration_gap_m": dev.registration_gap,
        "registration_angle_deg": rad_to_deg(dev.registration_angle),
    }


def scenario_to_json(scenario: Scenario) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "name": scenario.name,
        "anchor": {"fov_half_angle_deg": rad_to_deg(scenario.anchor.fov_half_angle)},
        "room": {
            "min_m": list(scenario.room.min_corner.as_tuple()),
            "max_m": list(scenario.room.max_corner.as_tuple()),
        },
        "noise": {
            "sigma_distance_m": scenario.noise.sigma_distance,
            "sigma_azimuth_deg": rad_to_deg(scenario.noise.sigma_azimuth),
            "sigma_elevation_deg": rad_to_deg(scenario.noise.sigma_elevation),
            "bias_azimuth_deg": rad_to_deg(scenario.noise.bias_azimuth),
            "bias_elevation_deg": rad_to_deg(scenario.noise.bias_elevation),
            "seed": scenario.noise.seed,
        },
        "gesture": {
            "jitter_amplitude_m": scenario.gesture.jitter_amplitude,
            "axis_wander_deg": rad_to_deg(scenario.gesture.axis_wander),
            "depth_wander_deg": rad_to_deg(scenario.gesture.depth_wander),
        },
        "devices": [_device_to_json(d) for d in scenario.devices],
    }
    if scenario.calibration is not None:
        doc["calibration"] = {
            "target_median_deg": scenario.calibration.target_median_deg,
            "achieved_median_deg": scenario.calibration.achieved_median_deg,
            "scale": scenario.calibration.scale,
            "trials": scenario.calibration.trials,
            "seed": scenario.calibration.seed,
        }
    return doc


def _require(doc: dict, key: str, kind, context: str):
    if key not in doc:
        raise ParseError(f"missing field {context}.{key}", field=f"{context}.{key}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"field {context}.{key} must be a number", field=f"{context}.{key}")
        return float(value)
    if not isinstance(value, kind):
        raise ParseError(
            f"field {context}.{key} must be {kind.__name__}", field=f"{context}.{key}"
        )
    return value


def _vec3_from(doc, context: str) -> Vec3:
    if (not isinstance(doc, list)) or len(doc) != 3 \
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in doc):
        raise ParseError(f"field {context} must be a list of 3 numbers", field=context)
    return Vec3(float(doc[0]), float(doc[1]), float(doc[2]))


def scenario_from_json(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported scenario format_version {version!r}; this build reads {FORMAT_VERSION}"
        )
    name = _require(doc, "name", str, "scenario")

    anchor_doc = _require(doc, "anchor", dict, "scenario")
    anchor = AnchorModel(
        fov_half_angle=deg_to_rad(_require(anchor_doc, "fov_half_angle_deg", float, "anchor"))
    )

    room_doc = _require(doc, "room", dict, "scenario")
    room = Box(
        _vec3_from(_require(room_doc, "min_m", list, "room"), "room.min_m"),
        _vec3_from(_require(room_doc, "max_m", list, "room"), "room.max_m"),
    )

    noise_doc = _require(doc, "noise", dict, "scenario")
    noise = NoiseModel(
        sigma_distance=_require(noise_doc, "sigma_distance_m", float, "noise"),
        sigma_azimuth=deg_to_rad(_require(noise_doc, "sigma_azimuth_deg", float, "noise")),
        sigma_elevation=deg_to_rad(_require(noise_doc, "sigma_elevation_deg", float, "noise")),
        seed=int(_require(noise_doc, "seed", int, "noise")),
        bias_azimuth=deg_to_rad(float(noise_doc.get("bias_azimuth_deg", 0.0))),
        bias_elevation=deg_to_rad(float(noise_doc.get("bias_elevation_deg", 0.0))),
    )

    gesture_doc = doc.get("gesture", {})
    if not isinstance(gesture_doc, dict):
        raise ParseError("field scenario.gesture must be an object", field="gesture")
    gesture = GestureModel(
        jitter_amplitude=float(gesture_doc.get("jitter_amplitude_m", 0.003)),
        axis_wander=deg_to_rad(float(gesture_doc.get("axis_wander_deg", 0.0))),
        depth_wander=deg_to_rad(float(gesture_doc.get("depth_wander_deg", 0.0))),
    )

    devices_doc = _require(doc, "devices", list, "scenario")
    records = []
    for i, dev in enumerate(devices_doc):
        context = f"devices[{i}]"
        if not isinstance(dev, dict):
            raise ParseError(f"{context} must be an object", field=context)
        record = DeviceRecord(
            id=_require(dev, "id", str, context),
            label=_require(dev, "label", str, context),
            position=_vec3_from(_require(dev, "position_m", list, context),
                                f"{context}.position_m"),
            registered_at=float(dev.get("registered_at_s", 0.0)),
            registration_gap=float(dev.get("registration_gap_m", 0.0)),
            registration_angle=deg_to_rad(float(dev.get("registration_angle_deg", 0.0))),
        )
        if not room.contains(record.position):
            raise ParseError(
                f"{context}: device {record.id!r} lies outside the room bounds",
                field=context,
            )
        records.append(record)
    if len({r.id for r in records}) != len(records):
        raise ParseError("duplicate device ids in scenario", field="devices")

    calibration = None
    if "calibration" in doc and doc["calibration"] is not None:
        cal = doc["calibration"]
        if not isinstance(cal, dict):
            raise ParseError("field scenario.calibration must be an object", field="calibration")
        calibration = CalibrationInfo(
            target_median_deg=_require(cal, "target_median_deg", float, "calibration"),
            achieved_median_deg=_require(cal, "achieved_median_deg", float, "calibration"),
            scale=_require(cal, "scale", float, "calibration"),
            trials=int(_require(cal, "trials", int, "calibration")),
            seed=int(_require(cal, "seed", int, "calibration")),
        )

    return Scenario(
        name=name,
        anchor=anchor,
        room=room,
        noise=noise,
        gesture=gesture,
        catalog=DeviceCatalog(records),
        calibration=calibration,
    )


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(serialize_scenario(scenario), encoding="utf-8")


def serialize_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_json(scenario), indent=2) + "\n"


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    return parse_scenario(text)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", line=exc.lineno) from exc
    return scenario_from_json(doc)


def default_scenario(name: str = "default", seed: int = 0) -> Scenario:
    return Scenario(name=name, noise=NoiseModel(seed=seed))
