"""Reading trace files: CSV with gesture boundary markers.

Format (UTF-8, LF line endings):

    timestamp_s,distance_m,azimuth_deg,elevation_deg
    # gesture <id> start
    0.0,5.0,0.3,-1.2
    ...
    # gesture <id> end

Angles are degrees in the file (what phone logging apps export) and
radians in memory.  A file with no markers is read as one anonymous
gesture with id "0".  Floats are written with shortest round-trip repr,
so write -> read -> write reproduces the file byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError
from .geom import UwbReading, deg_to_rad, rad_to_deg

HEADER = "timestamp_s,distance_m,azimuth_deg,elevation_deg"


@dataclass(frozen=True)
class GestureTrace:
    id: str
    readings: tuple[UwbReading, ...]


def _parse_row(line: str, lineno: int) -> UwbReading:
    parts = line.split(",")
    if len(parts) != 4:
        raise ParseError(
            f"row {lineno}: expected 4 comma-separated fields, got {len(parts)}",
            line=lineno,
        )
    try:
        timestamp, distance, az_deg, el_deg = (float(p) for p in parts)
    except ValueError as exc:
        raise ParseError(f"row {lineno}: non-numeric field ({exc})", line=lineno) from exc
    try:
        return UwbReading(
            distance=distance,
            azimuth=deg_to_rad(az_deg),
            elevation=deg_to_rad(el_deg),
            timestamp=timestamp,
        )
    except Exception as exc:
        raise ParseError(f"row {lineno}: invalid reading ({exc})", line=lineno) from exc


def parse_trace(text: str) -> list[GestureTrace]:
    lines = text.split("\n")
    if not lines or lines[0].strip() != HEADER:
        raise ParseError(f"row 1: expected header {HEADER!r}", line=1)

    gestures: list[GestureTrace] = []
    current_id: str | None = None
    current: list[UwbReading] = []
    unmarked: list[UwbReading] = []
    saw_marker = False
    unmarked_rows: list[int] = []

    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if len(fields) == 3 and fields[0] == "gesture" and fields[2] in ("start", "end"):
                saw_marker = True
                gesture_id, kind = fields[1], fields[2]
                if kind == "start":
                    if current_id is not None:
                        raise ParseError(
                            f"row {lineno}: gesture {gesture_id!r} starts inside "
                            f"gesture {current_id!r}",
                            line=lineno,
                        )
                    current_id = gesture_id
                    current = []
                else:
                    if current_id != gesture_id:
                        raise ParseError(
                            f"row {lineno}: end of gesture {gesture_id!r} without "
                            "a matching start",
                            line=lineno,
                        )
                    gestures.append(GestureTrace(id=current_id, readings=tuple(current)))
                    current_id = None
                    current = []
                continue
            # Other comments are ignored.
            continue
        reading = _parse_row(line, lineno)
        if current_id is not None:
            if current and reading.timestamp <= current[-1].timestamp:
                raise ParseError(
                    f"row {lineno}: timestamp {reading.timestamp} not strictly "
                    "increasing within the gesture",
                    line=lineno,
                )
            current.append(reading)
        else:
            unmarked.append(reading)
            unmarked_rows.append(lineno)

    if current_id is not None:
        raise ParseError(f"gesture {current_id!r} never ends", line=len(lines))
    if saw_marker and unmarked:
        raise ParseError(
            f"row {unmarked_rows[0]}: reading outside any gesture block",
            line=unmarked_rows[0],
        )
    if not saw_marker and unmarked:
        for prev, cur, row in zip(unmarked, unmarked[1:], unmarked_rows[1:]):
            if cur.timestamp <= prev.timestamp:
                raise ParseError(
                    f"row {row}: timestamp {cur.timestamp} not strictly increasing",
                    line=row,
                )
        gestures.append(GestureTrace(id="0", readings=tuple(unmarked)))
    return gestures


def read_trace(path: str | Path) -> list[GestureTrace]:
    return parse_trace(Path(path).read_text(encoding="utf-8"))


def serialize_trace(gestures: list[GestureTrace]) -> str:
    out = [HEADER]
    for gesture in gestures:
        out.append(f"# gesture {gesture.id} start")
        for r in gesture.readings:
            out.append(
                f"{r.timestamp!r},{r.distance!r},"
                f"{rad_to_deg(r.azimuth)!r},{rad_to_deg(r.elevation)!r}"
            )
        out.append(f"# gesture {gesture.id} end")
    return "\n".join(out) + "\n"


def write_trace(gestures: list[GestureTrace], path: str | Path) -> None:
    Path(path).write_text(serialize_trace(gestures), encoding="utf-8", newline="\n")
