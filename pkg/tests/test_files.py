import json
import math

import pytest

from pointsel.errors import ParseError, UnsupportedVersionError
from pointsel.geom import UwbReading, Vec3, deg_to_rad
from pointsel.registry import DeviceCatalog, DeviceRecord
from pointsel.scenario import (
    Box,
    CalibrationInfo,
    GestureModel,
    Scenario,
    default_scenario,
    load_scenario,
    parse_scenario,
    save_scenario,
    serialize_scenario,
)
from pointsel.simkit import AnchorModel, NoiseModel
from pointsel.traces import GestureTrace, parse_trace, read_trace, serialize_trace, write_trace


def sample_scenario():
    catalog = DeviceCatalog([
        DeviceRecord(id="lamp", label="desk lamp", position=Vec3(1.2345678901234567, 0.3, 3.0),
                     registered_at=12.5, registration_gap=0.01,
                     registration_angle=math.radians(33.0)),
        DeviceRecord(id="tv", label="tv", position=Vec3(-2.0, 0.5, 4.5)),
    ])
    return Scenario(
        name="bedroom",
        anchor=AnchorModel(fov_half_angle=math.radians(60.0)),
        room=Box(Vec3(-3.0, -1.5, 0.0), Vec3(3.0, 1.5, 6.0)),
        noise=NoiseModel(sigma_distance=0.0123, sigma_azimuth=math.radians(0.7),
                         sigma_elevation=math.radians(0.6), seed=99,
                         bias_azimuth=math.radians(1.1), bias_elevation=math.radians(0.2)),
        gesture=GestureModel(jitter_amplitude=0.0011, axis_wander=math.radians(0.5),
                             depth_wander=math.radians(3.0)),
        catalog=catalog,
        calibration=CalibrationInfo(target_median_deg=2.33, achieved_median_deg=2.31,
                                    scale=0.97, trials=40, seed=42),
    )


class TestScenarioRoundTrip:
    def test_save_load_equal_structures(self, tmp_path):
        scenario = sample_scenario()
        path = tmp_path / "s.json"
        save_scenario(scenario, path)
        loaded = load_scenario(path)

        assert loaded.name == scenario.name
        assert loaded.room == scenario.room
        # Positions are meters in the file: bit-exact round trip.
        for a, b in zip(scenario.devices, loaded.devices):
            assert a.id == b.id and a.label == b.label
            assert a.position == b.position
            assert a.registered_at == b.registered_at
            assert a.registration_gap == b.registration_gap
        # Angle fields cross a degree conversion: within one ulp.
        assert loaded.noise.sigma_azimuth == pytest.approx(
            scenario.noise.sigma_azimuth, rel=1e-14)
        assert loaded.noise.sigma_distance == scenario.noise.sigma_distance
        assert loaded.noise.seed == scenario.noise.seed
        assert loaded.calibration == scenario.calibration

    def test_save_is_fixed_point_after_one_cycle(self, tmp_path):
        scenario = sample_scenario()
        first = serialize_scenario(scenario)
        second = serialize_scenario(parse_scenario(first))
        third = serialize_scenario(parse_scenario(second))
        assert second == third

    def test_unsupported_version(self):
        doc = json.loads(serialize_scenario(sample_scenario()))
        doc["format_version"] = 99
        with pytest.raises(UnsupportedVersionError):
            parse_scenario(json.dumps(doc))

    def test_missing_field_named(self):
        doc = json.loads(serialize_scenario(sample_scenario()))
        del doc["noise"]["sigma_distance_m"]
        with pytest.raises(ParseError) as excinfo:
            parse_scenario(json.dumps(doc))
        assert "sigma_distance_m" in str(excinfo.value)

    def test_device_outside_room_rejected(self):
        doc = json.loads(serialize_scenario(sample_scenario()))
        doc["devices"][0]["position_m"] = [99.0, 0.0, 3.0]
        with pytest.raises(ParseError) as excinfo:
            parse_scenario(json.dumps(doc))
        assert "room" in str(excinfo.value)

    def test_duplicate_ids_rejected(self):
        doc = json.loads(serialize_scenario(sample_scenario()))
        doc["devices"][1]["id"] = doc["devices"][0]["id"]
        with pytest.raises(ParseError):
            parse_scenario(json.dumps(doc))

    def test_invalid_json_carries_line(self):
        with pytest.raises(ParseError) as excinfo:
            parse_scenario("{\n  broken\n}")
        assert excinfo.value.line == 2

    def test_add_device_enforces_room_bounds(self):
        scenario = default_scenario()
        with pytest.raises(ValueError):
            scenario.add_device(DeviceRecord(id="x", label="x", position=Vec3(50, 0, 3)))


class TestTraceRoundTrip:
    def make_trace(self):
        readings = tuple(
            UwbReading(distance=5.0 + 0.01 * k, azimuth=deg_to_rad(0.3 * k),
                       elevation=deg_to_rad(-1.2 + 0.05 * k), timestamp=k / 55.0)
            for k in range(12)
        )
        return [GestureTrace(id="g1", readings=readings)]

    def test_write_read_identity(self, tmp_path):
        gestures = self.make_trace()
        path = tmp_path / "trace.csv"
        write_trace(gestures, path)
        loaded = read_trace(path)
        assert len(loaded) == 1
        assert loaded[0].id == "g1"
        # Second cycle is byte-identical (fixed point through the degree
        # conversion).
        assert serialize_trace(loaded) == serialize_trace(parse_trace(serialize_trace(loaded)))
        for a, b in zip(gestures[0].readings, loaded[0].readings):
            assert a.timestamp == b.timestamp
            assert a.distance == b.distance
            assert a.azimuth == pytest.approx(b.azimuth, rel=1e-14, abs=1e-300)
            assert a.elevation == pytest.approx(b.elevation, rel=1e-14, abs=1e-300)

    def test_example_row_parses_degrees(self):
        text = (
            "timestamp_s,distance_m,azimuth_deg,elevation_deg\n"
            "0.01818,5.002,0.3,-1.2\n"
        )
        gestures = parse_trace(text)
        assert len(gestures) == 1 and gestures[0].id == "0"
        r = gestures[0].readings[0]
        assert r.timestamp == 0.01818
        assert r.distance == 5.002
        assert r.azimuth == pytest.approx(deg_to_rad(0.3), abs=1e-15)
        assert r.elevation == pytest.approx(deg_to_rad(-1.2), abs=1e-15)

    def test_non_monotone_timestamp_names_row(self):
        text = (
            "timestamp_s,distance_m,azimuth_deg,elevation_deg\n"
            "# gesture g start\n"
            "0.0,5.0,0.0,0.0\n"
            "0.1,5.0,0.0,0.0\n"
            "0.05,5.0,0.0,0.0\n"
            "# gesture g end\n"
        )
        with pytest.raises(ParseError) as excinfo:
            parse_trace(text)
        assert excinfo.value.line == 5

    def test_missing_header(self):
        with pytest.raises(ParseError) as excinfo:
            parse_trace("0.0,5.0,0.0,0.0\n")
        assert excinfo.value.line == 1

    def test_bad_field_count_names_row(self):
        text = (
            "timestamp_s,distance_m,azimuth_deg,elevation_deg\n"
            "0.0,5.0,0.0\n"
        )
        with pytest.raises(ParseError) as excinfo:
            parse_trace(text)
        assert excinfo.value.line == 2

    def test_reading_outside_block_rejected_when_marked(self):
        text = (
            "timestamp_s,distance_m,azimuth_deg,elevation_deg\n"
            "0.0,5.0,0.0,0.0\n"
            "# gesture g start\n"
            "0.1,5.0,0.0,0.0\n"
            "# gesture g end\n"
        )
        with pytest.raises(ParseError):
            parse_trace(text)

    def test_unterminated_gesture_rejected(self):
        text = (
            "timestamp_s,distance_m,azimuth_deg,elevation_deg\n"
            "# gesture g start\n"
            "0.0,5.0,0.0,0.0\n"
        )
        with pytest.raises(ParseError):
            parse_trace(text)

    def test_multiple_gestures(self):
        gestures = [
            GestureTrace(id="a", readings=(UwbReading(5.0, 0.0, 0.0, 0.0),
                                           UwbReading(5.0, 0.01, 0.0, 0.1))),
            GestureTrace(id="b", readings=(UwbReading(4.0, 0.0, 0.0, 0.0),)),
        ]
        loaded = parse_trace(serialize_trace(gestures))
        assert [g.id for g in loaded] == ["a", "b"]
        assert len(loaded[0].readings) == 2 and len(loaded[1].readings) == 1
