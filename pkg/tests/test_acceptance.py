"""Acceptance suite: one test per primary criterion, each printing a
PASS/FAIL line (run with `pytest -s tests/test_acceptance.py` to watch).

Tolerances and runtime budgets are pinned here, not configurable.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from fastapi.testclient import TestClient

from helpers import brute_force_nearest, make_ray, random_unit
from pointsel.gateway.app import create_app
from pointsel.geom import (
    Ray,
    UwbReading,
    Vec3,
    angle_between,
    cartesian_to_spherical,
    deg_to_rad,
    nearest_point_between_rays,
    rad_to_deg,
    spherical_to_cartesian,
)
from pointsel.pointing import PointingRay, Trajectory, estimate_direction, estimate_pointing
from pointsel.registry import (
    DeviceCatalog,
    DeviceRecord,
    GuidanceNeeded,
    register_device,
    solve_two_ray_position,
    user_separation_check,
)
from pointsel.scenario import default_scenario, scenario_to_json
from pointsel.selector import score_device, select
from pointsel.simkit import GestureSpec, generate_gesture, theoretical_resolution
from pointsel.sweeps import (
    calibrate,
    pooled_direction_median,
    run_direction_sweep,
    run_registration_sweep,
    run_resolution_sweep,
)


def _announce(line: str) -> None:
    # Visible live under `pytest -s`; captured into the report otherwise.
    print(line, flush=True)


@contextmanager
def criterion(name: str, budget_s: float | None = None):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        _announce(f"[ACCEPTANCE] {name}: FAIL")
        raise
    elapsed = time.monotonic() - start
    if budget_s is not None and elapsed > budget_s:
        _announce(f"[ACCEPTANCE] {name}: FAIL (runtime {elapsed:.1f}s > {budget_s}s)")
        pytest.fail(f"{name}: runtime {elapsed:.1f}s exceeded budget {budget_s}s")
    _announce(f"[ACCEPTANCE] {name}: PASS ({elapsed:.1f}s)")


def test_spherical_round_trip():
    with criterion("spherical round-trip (1e4 points, <1e-9)", budget_s=1.0):
        rng = np.random.default_rng(1001)
        for _ in range(10_000):
            reading = UwbReading(
                distance=float(rng.uniform(0.01, 100.0)),
                azimuth=float(rng.uniform(-math.pi * 0.9999, math.pi * 0.9999)),
                elevation=float(rng.uniform(-math.pi / 2 * 0.9999, math.pi / 2 * 0.9999)),
            )
            p = spherical_to_cartesian(reading)
            back = spherical_to_cartesian(cartesian_to_spherical(p))
            assert abs(back.x - p.x) < 1e-9
            assert abs(back.y - p.y) < 1e-9
            assert abs(back.z - p.z) < 1e-9


def test_skew_line_solver_vs_brute_force():
    with criterion("skew-line solver vs brute force (100 pairs)", budget_s=10.0):
        rng = np.random.default_rng(1002)
        checked = 0
        while checked < 100:
            a = Ray(Vec3.from_array(rng.uniform(-2, 2, 3)), random_unit(rng))
            b = Ray(Vec3.from_array(rng.uniform(-2, 2, 3)), random_unit(rng))
            if a.direction.cross(b.direction).norm() <= 0.05:
                continue
            point, t1, t2, _ = nearest_point_between_rays(a, b)
            grid_point, g1, g2 = brute_force_nearest(a, b)
            assert np.linalg.norm(point.as_array() - grid_point) <= 2e-3
            assert abs(t1 - g1) <= 1e-3 + 1e-6
            assert abs(t2 - g2) <= 1e-3 + 1e-6
            checked += 1


def test_pca_exactness_on_collinear_gestures():
    with criterion("PCA exactness (1000 noiseless lines, <1e-7 rad)", budget_s=5.0):
        rng = np.random.default_rng(1003)
        for _ in range(1000):
            direction = random_unit(rng)
            start = Vec3.from_array(rng.uniform(-2, 2, 3) + np.array([0.0, 0.0, 4.0]))
            n = int(rng.integers(8, 40))
            along = np.linspace(0.0, float(rng.uniform(0.05, 0.5)), n)
            positions = start.as_array()[None, :] + along[:, None] * direction.as_array()[None, :]
            traj = Trajectory(times=np.arange(n, dtype=float), positions=positions)
            ray = estimate_direction(traj)
            assert angle_between(ray.direction, direction) < 1e-7
            reversed_traj = Trajectory(times=np.arange(n, dtype=float),
                                       positions=positions[::-1].copy())
            flipped = estimate_direction(reversed_traj)
            assert angle_between(
                flipped.direction,
                Vec3(-direction.x, -direction.y, -direction.z),
            ) < 1e-7


def test_selection_oracle_equivalence():
    with criterion("selection vs exhaustive argmin (1000 instances)", budget_s=10.0):
        rng = np.random.default_rng(1004)
        for _ in range(1000):
            n_devices = int(rng.integers(1, 51))
            catalog = []
            for i in range(n_devices):
                p = rng.uniform(-4, 4, 3) + np.array([0.0, 0.0, 5.0])
                catalog.append(DeviceRecord(id=f"d{i:02d}", label="x",
                                            position=Vec3.from_array(p)))
            n_samples = int(rng.integers(1, 12))
            samples = rng.uniform(-0.1, 0.1, (n_samples, 3))
            ray = PointingRay(
                direction=random_unit(rng),
                sample_positions=Trajectory(times=np.arange(n_samples, dtype=float),
                                            positions=samples),
                net_displacement=0.2, mean_speed=0.1, explained_variance_ratio=1.0,
            )
            result = select(ray, catalog)
            oracle = min(((score_device(ray, d), d.id) for d in catalog),
                         key=lambda t: (t[0], t[1]))
            assert result.ranked[0][0] == oracle[1]
            if not result.is_ambiguous:
                assert result.chosen == oracle[1]


def test_theoretical_resolution_curve():
    with criterion("theoretical resolution (0.206 m at 5 m; monotone)"):
        assert abs(theoretical_resolution(5.0, deg_to_rad(2.36)) - 0.206) <= 0.001
        curve = [theoretical_resolution(d, deg_to_rad(2.36))
                 for d in (1.0, 2.0, 3.0, 4.0, 5.0)]
        assert all(b > a for a, b in zip(curve, curve[1:]))


def test_calibrated_direction_accuracy():
    with criterion("calibrated direction accuracy (median in [1.8, 2.9] deg, "
                   "flatness < 1.5 deg)", budget_s=120.0):
        scenario = default_scenario(name="acceptance", seed=42)
        calibrate(scenario, trials_per_cell=30, seed=42)
        report = run_direction_sweep(scenario, trials=100, seed=777)
        medians = [row[report.columns.index("median_deg")] for row in report.rows]
        assert len(medians) == 36
        pooled = pooled_direction_median(scenario, trials=100, seed=777)
        assert 1.8 <= pooled <= 2.9, f"pooled median {pooled:.2f}"
        spread = max(medians) - min(medians)
        assert spread < 1.5, f"spread {spread:.2f}"


def test_displacement_trend(calibrated_scenario):
    with criterion("displacement trend (5 cm worst; >=10 cm below 3.5 deg)",
                   budget_s=120.0):
        report = run_direction_sweep(calibrated_scenario, axis="displacement",
                                     trials=100, seed=31)
        medians = {row[3]: row[5] for row in report.rows}
        for cell in (0.10, 0.15, 0.20, 0.25, 0.30):
            assert medians[0.05] > medians[cell], f"5 cm not worst vs {cell}"
            assert medians[cell] < 3.5, f"median {medians[cell]:.2f} at {cell}"


def test_resolution_sweep(calibrated_scenario):
    with criterion("resolution sweep (monotone, within +/-40% of theory)",
                   budget_s=300.0):
        report = run_resolution_sweep(calibrated_scenario, trials=300, seed=2024)
        empirical = [row[5] for row in report.rows]
        theoretical = [row[6] for row in report.rows]
        assert all(row[8] for row in report.rows), "bisection did not converge"
        assert all(b >= a for a, b in zip(empirical, empirical[1:])), \
            f"not monotone: {empirical}"
        for emp, theory in zip(empirical, theoretical):
            assert 0.6 * theory <= emp <= 1.4 * theory, \
                f"empirical {emp:.3f} outside +/-40% of {theory:.3f}"


def test_registration(calibrated_scenario):
    with criterion("registration (zero-noise <1e-6; calibrated <0.35 m, "
                   "decreasing 5->30 deg)", budget_s=120.0):
        # Zero noise: exact recovery for 1000 random in-room geometries with
        # ray angles of at least 20 degrees.
        rng = np.random.default_rng(1009)
        done = 0
        while done < 1000:
            device = Vec3(float(rng.uniform(-3, 3)), float(rng.uniform(-1.5, 1.5)),
                          float(rng.uniform(0.3, 6.0)))
            u1 = Vec3(float(rng.uniform(-3, 3)), float(rng.uniform(-1.5, 1.5)),
                      float(rng.uniform(0.3, 6.0)))
            u2 = Vec3(float(rng.uniform(-3, 3)), float(rng.uniform(-1.5, 1.5)),
                      float(rng.uniform(0.3, 6.0)))
            if min(u1.distance_to(device), u2.distance_to(device)) < 0.3:
                continue
            ray1 = make_ray(u1, (device - u1).normalized())
            ray2 = make_ray(u2, (device - u2).normalized())
            if angle_between(ray1.direction, ray2.direction) < deg_to_rad(20.0):
                continue
            solution = solve_two_ray_position(ray1, ray2)
            assert solution.position.distance_to(device) < 1e-6
            done += 1

        # Calibrated noise: mean error small and stable past 20 degrees,
        # strictly decreasing from 5 to 30 degrees.
        report = run_registration_sweep(calibrated_scenario, trials=200, seed=99)
        means = [row[5] for row in report.rows]
        cells = [row[3] for row in report.rows]
        assert cells == [5.0, 10.0, 20.0, 30.0]
        assert all(b < a for a, b in zip(means, means[1:])), f"not decreasing: {means}"
        assert means[2] < 0.35 and means[3] < 0.35, f"errors past 20 deg: {means[2:]}"


def test_guidance_rules():
    with criterion("guidance rules (1.4 m and 20 deg inclusive boundaries)"):
        assert isinstance(user_separation_check(Vec3(0, 0, 4), Vec3(1.39, 0, 4)),
                          GuidanceNeeded)
        assert user_separation_check(Vec3(0, 0, 4), Vec3(1.40, 0, 4)) is None

        def rays_at(deg):
            d2 = Vec3(math.sin(deg_to_rad(deg)), 0.0, math.cos(deg_to_rad(deg)))
            return (make_ray(Vec3(0, 0, 0), Vec3(0, 0, 1)),
                    make_ray(Vec3(2, 0, 0), d2))

        catalog = DeviceCatalog()
        assert isinstance(register_device(catalog, "x", *rays_at(19.9)), GuidanceNeeded)
        assert isinstance(register_device(catalog, "x", *rays_at(20.0)), DeviceRecord)


def test_determinism(calibrated_scenario):
    with criterion("determinism (byte-identical sweep CSV)"):
        first = run_direction_sweep(calibrated_scenario, axis="displacement",
                                    grid=[0.1, 0.2], trials=20, seed=7).to_csv()
        second = run_direction_sweep(calibrated_scenario, axis="displacement",
                                     grid=[0.1, 0.2], trials=20, seed=7).to_csv()
        assert first == second
        res1 = run_resolution_sweep(calibrated_scenario, ranges=[2.0], trials=20,
                                    seed=3).to_csv()
        res2 = run_resolution_sweep(calibrated_scenario, ranges=[2.0], trials=20,
                                    seed=3).to_csv()
        assert res1 == res2


def test_gateway_transparency(tmp_path):
    with criterion("gateway transparency (50-message transcript, field-exact)",
                   budget_s=60.0):
        client = TestClient(create_app(scenario_dir=str(tmp_path)))
        sent = 0

        def call(body):
            nonlocal sent
            sent += 1
            reply = client.post("/v1/message", json=body).json()
            assert reply["request_id"] == body["request_id"]
            return reply

        scenario = default_scenario(name="transcript", seed=13)
        session = call({"type": "create_session", "request_id": "c"})["result"]["session"]
        call({"type": "load_scenario", "session": session, "request_id": "l",
              "scenario": scenario_to_json(scenario)})

        def wire(readings):
            return [{"timestamp_s": r.timestamp, "distance_m": r.distance,
                     "azimuth_deg": rad_to_deg(r.azimuth),
                     "elevation_deg": rad_to_deg(r.elevation)} for r in readings]

        def decode(payload):
            return [UwbReading(distance=p["distance_m"],
                               azimuth=deg_to_rad(p["azimuth_deg"]),
                               elevation=deg_to_rad(p["elevation_deg"]),
                               timestamp=p["timestamp_s"]) for p in payload]

        def gesture(readings, prefix):
            call({"type": "begin_gesture", "session": session,
                  "request_id": f"{prefix}b"})
            call({"type": "append_readings", "session": session,
                  "request_id": f"{prefix}a", "readings": wire(readings)})
            return call({"type": "end_gesture", "session": session,
                         "request_id": f"{prefix}e"})

        geometries = [
            (Vec3(-0.8, 0.0, 4.0), Vec3(1.0, 0.3, 3.0)),
            (Vec3(1.6, 0.0, 4.4), Vec3(1.0, 0.3, 3.0)),
            (Vec3(-1.2, 0.2, 4.2), Vec3(-1.5, 0.4, 4.0)),
            (Vec3(1.0, -0.2, 3.0), Vec3(-1.5, 0.4, 4.0)),
            (Vec3(0.0, 0.0, 5.0), Vec3(1.0, 0.3, 3.0)),
            (Vec3(0.5, 0.1, 4.5), Vec3(-1.5, 0.4, 4.0)),
        ]
        mirror_catalog = DeviceCatalog()
        mirror_rays = []
        for k, (start, target) in enumerate(geometries):
            spec = GestureSpec(
                start=start, direction=(target - start).normalized(),
                displacement=0.2, speed=0.1,
                jitter_amplitude=scenario.gesture.jitter_amplitude,
                axis_wander=scenario.gesture.axis_wander,
                depth_wander=scenario.gesture.depth_wander,
            )
            _, readings = generate_gesture(spec, scenario.noise.with_seed(500 + k),
                                           scenario.anchor)
            reply = gesture(readings, f"g{k}")
            direct = estimate_pointing(decode(wire(readings)))
            mirror_rays.append(direct)
            assert reply["result"]["ray"]["direction"] == [
                direct.direction.x, direct.direction.y, direct.direction.z]
            assert reply["result"]["ray"]["net_displacement_m"] == direct.net_displacement
            if k == 0:
                call({"type": "register_first", "session": session, "request_id": "rf0"})
            if k == 1:
                reg = call({"type": "register_second", "session": session,
                            "request_id": "rs0", "label": "lamp"})
                direct_record = register_device(mirror_catalog, "lamp",
                                                mirror_rays[0], mirror_rays[1])
                assert reg["result"]["device"]["position_m"] == [
                    direct_record.position.x, direct_record.position.y,
                    direct_record.position.z]
            if k == 2:
                call({"type": "register_first", "session": session, "request_id": "rf1"})
            if k == 3:
                reg = call({"type": "register_second", "session": session,
                            "request_id": "rs1", "label": "tv"})
                direct_record2 = register_device(mirror_catalog, "tv",
                                                 mirror_rays[2], mirror_rays[3])
                assert reg["result"]["device"]["position_m"] == [
                    direct_record2.position.x, direct_record2.position.y,
                    direct_record2.position.z]
            if k >= 4:
                sel = call({"type": "select", "session": session,
                            "request_id": f"sel{k}"})
                direct_sel = select(direct, mirror_catalog.list())
                assert sel["result"]["ranked"] == [
                    [dev_id, score] for dev_id, score in direct_sel.ranked]

        # A couple of extra probe gestures + selects to pass 50 messages.
        for k in range(6, 14):
            start, target = geometries[k % len(geometries)]
            spec = GestureSpec(
                start=start, direction=(target - start).normalized(),
                displacement=0.2, speed=0.1,
                jitter_amplitude=scenario.gesture.jitter_amplitude,
                axis_wander=scenario.gesture.axis_wander,
                depth_wander=scenario.gesture.depth_wander,
            )
            _, readings = generate_gesture(spec, scenario.noise.with_seed(900 + k),
                                           scenario.anchor)
            reply = gesture(readings, f"x{k}")
            direct = estimate_pointing(decode(wire(readings)))
            assert reply["result"]["ray"]["direction"] == [
                direct.direction.x, direct.direction.y, direct.direction.z]
            sel = call({"type": "select", "session": session, "request_id": f"xs{k}"})
            direct_sel = select(direct, mirror_catalog.list())
            assert sel["result"]["ranked"] == [
                [dev_id, score] for dev_id, score in direct_sel.ranked]

        assert sent >= 50, f"transcript only had {sent} messages"
