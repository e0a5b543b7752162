"""Wire protocol, version 1.

Every message is one JSON object with ``type``, ``request_id``, and (for
all types except create_session) ``session``; each message receives
exactly one reply that echoes the request_id and carries either a
``result`` object or a structured ``error`` {code, message, detail}.
Quantities cross the wire in meters and degrees; radians stay internal.
"""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field

PROTOCOL_VERSION = 1


class _Payload(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ReadingIn(_Payload):
    timestamp_s: float
    distance_m: float
    azimuth_deg: float
    elevation_deg: float


class GestureSpecIn(_Payload):
    """Simulated gesture request; aim with either direction or target."""

    start_m: list[float] = Field(min_length=3, max_length=3)
    direction: list[float] | None = Field(default=None, min_length=3, max_length=3)
    target_m: list[float] | None = Field(default=None, min_length=3, max_length=3)
    displacement_m: float = 0.2
    speed_mps: float = 0.1
    seed: int | None = None


class CreateSession(_Payload):
    type: Literal["create_session"]
    request_id: str


class _SessionMessage(_Payload):
    request_id: str
    session: str


class LoadScenario(_SessionMessage):
    type: Literal["load_scenario"]
    scenario: dict | None = None   # inline document ...
    name: str | None = None        # ... or a file in the scenario directory


class SaveScenario(_SessionMessage):
    type: Literal["save_scenario"]
    name: str


class GetScenario(_SessionMessage):
    type: Literal["get_scenario"]


class BeginGesture(_SessionMessage):
    type: Literal["begin_gesture"]


class AppendReadings(_SessionMessage):
    type: Literal["append_readings"]
    readings: list[ReadingIn]


class EndGesture(_SessionMessage):
    type: Literal["end_gesture"]


class SimulateGesture(_SessionMessage):
    type: Literal["simulate_gesture"]
    spec: GestureSpecIn


class ReplayTrace(_SessionMessage):
    type: Literal["replay_trace"]
    trace_csv: str
    gesture: str | None = None


class RegisterFirst(_SessionMessage):
    type: Literal["register_first"]


class RegisterSecond(_SessionMessage):
    type: Literal["register_second"]
    label: str


class Select(_SessionMessage):
    type: Literal["select"]


class ListDevices(_SessionMessage):
    type: Literal["list_devices"]


class RemoveDevice(_SessionMessage):
    type: Literal["remove_device"]
    device_id: str


class RunSweep(_SessionMessage):
    type: Literal["run_sweep"]
    axis: str
    trials: int = 100
    seed: int | None = None
    grid: list[float] | None = None


Message = Union[
    CreateSession,
    LoadScenario,
    SaveScenario,
    GetScenario,
    BeginGesture,
    AppendReadings,
    EndGesture,
    SimulateGesture,
    ReplayTrace,
    RegisterFirst,
    RegisterSecond,
    Select,
    ListDevices,
    RemoveDevice,
    RunSweep,
]

MESSAGE_TYPES = {
    "create_session": CreateSession,
    "load_scenario": LoadScenario,
    "save_scenario": SaveScenario,
    "get_scenario": GetScenario,
    "begin_gesture": BeginGesture,
    "append_readings": AppendReadings,
    "end_gesture": EndGesture,
    "simulate_gesture": SimulateGesture,
    "replay_trace": ReplayTrace,
    "register_first": RegisterFirst,
    "register_second": RegisterSecond,
    "select": Select,
    "list_devices": ListDevices,
    "remove_device": RemoveDevice,
    "run_sweep": RunSweep,
}


class ErrorBody(BaseModel):
    code: str
    message: str
    detail: dict = Field(default_factory=dict)


class Reply(BaseModel):
    protocol_version: int = PROTOCOL_VERSION
    request_id: str
    ok: bool
    result: dict | None = None
    error: ErrorBody | None = None


def ok_reply(request_id: str, result: dict) -> dict:
    return Reply(request_id=request_id, ok=True, result=result).model_dump()


def error_reply(request_id: str, code: str, message: str, detail: dict | None = None) -> dict:
    return Reply(
        request_id=request_id,
        ok=False,
        error=ErrorBody(code=code, message=message, detail=detail or {}),
    ).model_dump()


def protocol_description() -> dict:
    """Machine-readable schema summary served at /v1/protocol."""
    return {
        "protocol_version": PROTOCOL_VERSION,
        "messages": {
            name: model.model_json_schema() for name, model in MESSAGE_TYPES.items()
        },
        "reply": Reply.model_json_schema(),
    }
