"""Target identification: match a pointing ray against the device catalog.

A device's score is the trajectory-averaged misalignment between the
pointing direction and the unit vectors from each (smoothed) sample
position to the device: mean over samples of |1 - n_s . n_i(m)|.  Zero
means perfect alignment at every sample; the best device is the argmin.
Devices whose score is within the ambiguity margin of the best are
surfaced together as candidates instead of silently picking one.

Two baseline selectors mirror the classic per-device-hardware schemes
(largest distance change; smallest AoA).  They need per-device ranging
feeds that only the simulator can provide, so they are simulation-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, EmptyCatalogError
from .pointing import PointingRay
from .registry import DeviceRecord

# Candidate margin: devices whose best-sample misalignment corresponds to
# an angular offset within this of the best device are all surfaced.
# 2.36 degrees is the measured direction-estimation accuracy the spatial
# resolution analysis is built on.
DEFAULT_AMBIGUITY_MARGIN = math.radians(2.36)

_MIN_SAMPLE_DEVICE_DISTANCE = 1e-6


@dataclass(frozen=True)
class Ambiguous:
    """More than one device matched within the margin; let the user pick."""

    candidates: tuple[str, ...]


@dataclass(frozen=True)
class SelectionResult:
    ranked: tuple[tuple[str, float], ...]   # (device_id, score), ascending score
    chosen: str | Ambiguous
    mean_offsets: dict[str, float]          # device_id -> mean angular offset (rad)

    @property
    def best_id(self) -> str:
        return self.ranked[0][0]

    @property
    def is_ambiguous(self) -> bool:
        return isinstance(self.chosen, Ambiguous)


def _offsets_to_device(ray: PointingRay, device: DeviceRecord) -> np.ndarray:
    positions = ray.sample_positions.positions
    offsets = device.position.as_array()[None, :] - positions
    dists = np.linalg.norm(offsets, axis=1)
    if np.any(dists <= _MIN_SAMPLE_DEVICE_DISTANCE):
        raise DegenerateGeometryError(
            f"device {device.id} coincides with a trajectory sample"
        )
    return offsets / dists[:, None]


def score_device(ray: PointingRay, device: DeviceRecord) -> float:
    """Mean misalignment of the pointing direction with one device."""
    units = _offsets_to_device(ray, device)
    dots = units @ ray.direction.as_array()
    return float(np.mean(np.abs(1.0 - dots)))


def mean_angular_offset(ray: PointingRay, device: DeviceRecord) -> float:
    """Mean angle (radians) between the pointing direction and the device bearing."""
    units = _offsets_to_device(ray, device)
    dots = np.clip(units @ ray.direction.as_array(), -1.0, 1.0)
    return float(np.mean(np.arccos(dots)))


def select(
    ray: PointingRay,
    catalog: list[DeviceRecord],
    ambiguity_margin: float = DEFAULT_AMBIGUITY_MARGIN,
) -> SelectionResult:
    """Rank all devices by score; best wins unless others sit within the margin.

    The angular ambiguity margin converts to a score margin of
    1 - cos(margin).  Exact score ties always come out ambiguous, with
    candidate ids (and the ranking) ordered lexicographically on ties for
    determinism.
    """
    if not catalog:
        raise EmptyCatalogError("cannot select from an empty catalog")

    scored = sorted(
        ((device.id, score_device(ray, device)) for device in catalog),
        key=lambda item: (item[1], item[0]),
    )
    offsets = {device.id: mean_angular_offset(ray, device) for device in catalog}

    score_margin = 1.0 - math.cos(ambiguity_margin)
    best_score = scored[0][1]
    candidates = tuple(dev_id for dev_id, s in scored if s <= best_score + score_margin)

    chosen: str | Ambiguous
    if len(candidates) > 1:
        chosen = Ambiguous(candidates=candidates)
    else:
        chosen = scored[0][0]

    return SelectionResult(ranked=tuple(scored), chosen=chosen, mean_offsets=offsets)


@dataclass(frozen=True)
class BaselineResult:
    chosen: str
    metric: dict[str, float]
    tie: bool


def baseline_distance_change(
    per_device_distances: dict[str, list[tuple[float, float]]],
) -> BaselineResult:
    """Pick the device whose range to the user changed the most.

    The pointed-at device sees the largest |last - first| distance change
    during the gesture.  Ties break by device id order and are reported.
    """
    if not per_device_distances:
        raise EmptyCatalogError("no distance series supplied")
    changes: dict[str, float] = {}
    for dev_id, series in per_device_distances.items():
        if len(series) < 2:
            raise ValueError(f"distance series for {dev_id!r} needs >= 2 samples")
        changes[dev_id] = abs(series[-1][1] - series[0][1])
    best = max(sorted(changes), key=lambda d: changes[d])
    tie = sum(1 for v in changes.values() if v == changes[best]) > 1
    return BaselineResult(chosen=best, metric=changes, tie=tie)


def baseline_aoa(per_device_aoas: dict[str, list[float]]) -> BaselineResult:
    """Pick the device whose AoA at the user device stays closest to zero.

    Scored as mean |AoA| over the final quarter of the gesture, once the
    device is actually aimed at the target.  Ties break by id order.
    """
    if not per_device_aoas:
        raise EmptyCatalogError("no AoA series supplied")
    means: dict[str, float] = {}
    for dev_id, series in per_device_aoas.items():
        if not series:
            raise ValueError(f"AoA series for {dev_id!r} is empty")
        tail = series[-max(1, math.ceil(len(series) / 4)):]
        means[dev_id] = float(np.mean(np.abs(tail)))
    best = min(sorted(means), key=lambda d: means[d])
    tie = sum(1 for v in means.values() if v == means[best]) > 1
    return BaselineResult(chosen=best, metric=means, tie=tie)
