"""Session service: dispatches protocol messages onto the library.

Transport-agnostic: `SessionManager.handle(dict) -> dict` processes one
message and returns one reply.  The gateway adds no numerics of its own;
every result is produced by the same library calls a direct user would
make, so replies are field-exact equal to direct computation.

Sessions are isolated (one scenario, one gesture buffer, one event log
each); messages within a session are serialized by a per-session lock.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from pydantic import ValidationError

from ..errors import PointselError, ProtocolError
from ..geom import UwbReading, Vec3, deg_to_rad, rad_to_deg
from ..pointing import PointingRay, estimate_pointing, gesture_quality
from ..registry import DeviceRecord, GuidanceNeeded, register_device, user_separation_check
from ..scenario import (
    Scenario,
    default_scenario,
    load_scenario,
    save_scenario,
    scenario_from_json,
    scenario_to_json,
)
from ..selector import Ambiguous, select
from ..simkit import GestureSpec, generate_gesture
from ..sweeps import (
    DEFAULT_GRIDS,
    run_direction_sweep,
    run_registration_sweep,
    run_resolution_sweep,
)
from ..traces import parse_trace
from .protocol import MESSAGE_TYPES, error_reply, ok_reply


def _vec(values) -> Vec3:
    return Vec3(float(values[0]), float(values[1]), float(values[2]))


def _vec_out(v: Vec3) -> list[float]:
    return [v.x, v.y, v.z]


def _ray_summary(ray: PointingRay) -> dict:
    quality = gesture_quality(ray)
    origin = ray.origin
    return {
        "direction": _vec_out(ray.direction),
        "origin_m": _vec_out(origin),
        "net_displacement_m": ray.net_displacement,
        "mean_speed_mps": ray.mean_speed,
        "explained_variance_ratio": ray.explained_variance_ratio,
        "flags": list(quality.flags),
        "sample_count": len(ray.sample_positions),
    }


def _device_out(record: DeviceRecord) -> dict:
    return {
        "id": record.id,
        "label": record.label,
        "position_m": _vec_out(record.position),
        "registered_at_s": record.registered_at,
        "registration_gap_m": record.registration_gap,
        "registration_angle_deg": rad_to_deg(record.registration_angle),
    }


def _guidance_out(guidance: GuidanceNeeded) -> dict:
    body = {"reason": guidance.reason, "hint": guidance.hint}
    if guidance.angle is not None:
        body["angle_deg"] = rad_to_deg(guidance.angle)
    if guidance.separation is not None:
        body["separation_m"] = guidance.separation
    return body


@dataclass
class Session:
    id: str
    scenario: Scenario
    lock: threading.Lock = field(default_factory=threading.Lock)
    gesture_buffer: list[UwbReading] | None = None  # None = no gesture open
    last_ray: PointingRay | None = None
    first_ray: PointingRay | None = None            # pending registration leg
    events: list[str] = field(default_factory=list)

    def log(self, entry: str) -> None:
        self.events.append(entry)


class SessionManager:
    def __init__(self, scenario_dir: str | Path = "."):
        self.scenario_dir = Path(scenario_dir)
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- plumbing ---------------------------------------------------------

    def handle(self, raw: dict) -> dict:
        request_id = str(raw.get("request_id", "")) if isinstance(raw, dict) else ""
        try:
            if not isinstance(raw, dict):
                raise ProtocolError("message must be a JSON object")
            msg_type = raw.get("type")
            model = MESSAGE_TYPES.get(msg_type)
            if model is None:
                raise ProtocolError(f"unknown message type {msg_type!r}")
            try:
                message = model.model_validate(raw)
            except ValidationError as exc:
                raise ProtocolError(
                    f"invalid {msg_type} message: {exc.errors()[0]['msg']}"
                ) from exc

            if msg_type == "create_session":
                return ok_reply(message.request_id, self._create_session())

            session = self._sessions.get(message.session)
            if session is None:
                return error_reply(message.request_id, "UNKNOWN_SESSION",
                                   f"no session {message.session!r}")
            with session.lock:
                session.log(msg_type)
                result = getattr(self, f"_op_{msg_type}")(session, message)
            return ok_reply(message.request_id, result)
        except ProtocolError as exc:
            return error_reply(request_id, exc.code, str(exc))
        except PointselError as exc:
            return error_reply(request_id, exc.code, str(exc))
        except (ValueError, KeyError) as exc:
            return error_reply(request_id, "VALIDATION", str(exc))

    def _create_session(self) -> dict:
        session_id = uuid.uuid4().hex
        with self._registry_lock:
            self._sessions[session_id] = Session(
                id=session_id, scenario=default_scenario(name="session")
            )
        return {"session": session_id, "scenario": scenario_to_json(
            self._sessions[session_id].scenario)}

    def _scenario_path(self, name: str) -> Path:
        safe = Path(name).name
        if not safe.endswith(".json"):
            safe += ".json"
        return self.scenario_dir / safe

    # -- operations --------------------------------------------------------

    def _op_load_scenario(self, session: Session, msg) -> dict:
        if (msg.scenario is None) == (msg.name is None):
            raise ProtocolError("load_scenario needs exactly one of scenario/name")
        if msg.scenario is not None:
            scenario = scenario_from_json(msg.scenario)
        else:
            scenario = load_scenario(self._scenario_path(msg.name))
        session.scenario = scenario
        session.gesture_buffer = None
        session.first_ray = None
        session.last_ray = None
        return {"scenario": scenario_to_json(scenario)}

    def _op_save_scenario(self, session: Session, msg) -> dict:
        path = self._scenario_path(msg.name)
        save_scenario(session.scenario, path)
        return {"path": str(path)}

    def _op_get_scenario(self, session: Session, msg) -> dict:
        return {"scenario": scenario_to_json(session.scenario)}

    def _op_begin_gesture(self, session: Session, msg) -> dict:
        if session.gesture_buffer is not None:
            raise ProtocolError("gesture already open")
        session.gesture_buffer = []
        return {"open": True}

    def _op_append_readings(self, session: Session, msg) -> dict:
        if session.gesture_buffer is None:
            raise ProtocolError("append_readings outside begin/end gesture")
        for r in msg.readings:
            session.gesture_buffer.append(UwbReading(
                distance=r.distance_m,
                azimuth=deg_to_rad(r.azimuth_deg),
                elevation=deg_to_rad(r.elevation_deg),
                timestamp=r.timestamp_s,
            ))
        return {"count": len(session.gesture_buffer)}

    def _op_end_gesture(self, session: Session, msg) -> dict:
        if session.gesture_buffer is None:
            raise ProtocolError("end_gesture without begin_gesture")
        readings = session.gesture_buffer
        session.gesture_buffer = None
        ray = estimate_pointing(readings)
        session.last_ray = ray
        return {"ray": _ray_summary(ray)}

    def _op_simulate_gesture(self, session: Session, msg) -> dict:
        spec_in = msg.spec
        start = _vec(spec_in.start_m)
        if (spec_in.direction is None) == (spec_in.target_m is None):
            raise ProtocolError("simulate_gesture needs exactly one of direction/target_m")
        if spec_in.target_m is not None:
            direction = (_vec(spec_in.target_m) - start).normalized()
        else:
            direction = _vec(spec_in.direction).normalized()
        scenario = session.scenario
        spec = GestureSpec(
            start=start,
            direction=direction,
            displacement=spec_in.displacement_m,
            speed=spec_in.speed_mps,
            jitter_amplitude=scenario.gesture.jitter_amplitude,
            axis_wander=scenario.gesture.axis_wander,
            depth_wander=scenario.gesture.depth_wander,
        )
        noise = scenario.noise if spec_in.seed is None else scenario.noise.with_seed(spec_in.seed)
        truth, readings = generate_gesture(spec, noise, scenario.anchor)
        return {
            "readings": [
                {
                    "timestamp_s": r.timestamp,
                    "distance_m": r.distance,
                    "azimuth_deg": rad_to_deg(r.azimuth),
                    "elevation_deg": rad_to_deg(r.elevation),
                }
                for r in readings
            ],
            "truth": [
                {"timestamp_s": float(t), "position_m": [float(x) for x in p]}
                for t, p in zip(truth.times, truth.positions)
            ],
        }

    def _op_replay_trace(self, session: Session, msg) -> dict:
        gestures = parse_trace(msg.trace_csv)
        if not gestures:
            raise ProtocolError("trace contains no gestures")
        if msg.gesture is not None:
            matches = [g for g in gestures if g.id == msg.gesture]
            if not matches:
                raise ProtocolError(f"no gesture {msg.gesture!r} in trace")
            gesture = matches[0]
        else:
            gesture = gestures[0]
        ray = estimate_pointing(list(gesture.readings))
        session.last_ray = ray
        return {"gesture": gesture.id, "ray": _ray_summary(ray)}

    def _require_last_ray(self, session: Session) -> PointingRay:
        if session.last_ray is None:
            raise ProtocolError("no completed gesture in this session")
        return session.last_ray

    def _op_register_first(self, session: Session, msg) -> dict:
        ray = self._require_last_ray(session)
        session.first_ray = ray
        return {"stored": True, "origin_m": _vec_out(ray.origin)}

    def _op_register_second(self, session: Session, msg) -> dict:
        if session.first_ray is None:
            raise ProtocolError("register_second before register_first")
        first = session.first_ray
        second = self._require_last_ray(session)
        separation = user_separation_check(first.origin, second.origin)
        if separation is not None:
            return {"guidance": _guidance_out(separation)}
        outcome = register_device(session.scenario.catalog, msg.label, first, second)
        if isinstance(outcome, GuidanceNeeded):
            return {"guidance": _guidance_out(outcome)}
        session.first_ray = None
        return {"device": _device_out(outcome)}

    def _op_select(self, session: Session, msg) -> dict:
        ray = self._require_last_ray(session)
        result = select(ray, session.scenario.devices)
        body = {
            "ranked": [[dev_id, score] for dev_id, score in result.ranked],
            "offsets_deg": {k: rad_to_deg(v) for k, v in result.mean_offsets.items()},
        }
        if isinstance(result.chosen, Ambiguous):
            body["ambiguous"] = True
            body["candidates"] = list(result.chosen.candidates)
        else:
            body["ambiguous"] = False
            body["chosen"] = result.chosen
        return body

    def _op_list_devices(self, session: Session, msg) -> dict:
        return {"devices": [_device_out(d) for d in session.scenario.devices]}

    def _op_remove_device(self, session: Session, msg) -> dict:
        removed = session.scenario.catalog.remove(msg.device_id)
        return {"removed": _device_out(removed)}

    def _op_run_sweep(self, session: Session, msg) -> dict:
        scenario = session.scenario
        if msg.axis in DEFAULT_GRIDS:
            report = run_direction_sweep(scenario, axis=msg.axis, grid=msg.grid,
                                         trials=msg.trials, seed=msg.seed)
        elif msg.axis == "resolution":
            report = run_resolution_sweep(scenario, ranges=msg.grid, trials=msg.trials,
                                          seed=msg.seed)
        elif msg.axis == "registration":
            report = run_registration_sweep(scenario, angles_deg=msg.grid,
                                            trials=msg.trials, seed=msg.seed)
        else:
            raise ProtocolError(f"unknown sweep axis {msg.axis!r}")
        return {
            "report": {
                "experiment": report.experiment,
                "axis": report.axis,
                "seed": report.seed,
                "columns": list(report.columns),
                "rows": [list(row) for row in report.rows],
                "csv": report.to_csv(),
            }
        }
