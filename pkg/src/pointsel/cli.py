"""Command-line interface.

Thin wrappers over the library: every subcommand maps onto one library
operation, emits CSV results on stdout, keeps diagnostics on stderr, and
exits 0 on success or 2 on any validation/usage error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import PointselError
from .geom import Vec3, rad_to_deg
from .pointing import estimate_pointing, gesture_quality
from .registry import DeviceRecord, GuidanceNeeded, register_device, user_separation_check
from .scenario import default_scenario, load_scenario, save_scenario
from .selector import Ambiguous, select
from .simkit import GestureSpec, generate_gesture
from .sweeps import (
    DEFAULT_CALIBRATION_TARGET_DEG,
    DEFAULT_GRIDS,
    calibrate,
    run_direction_sweep,
    run_registration_sweep,
    run_resolution_sweep,
)
from .traces import GestureTrace, read_trace, write_trace

PROG = "pointsel"


def _parse_vec3(text: str) -> Vec3:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    try:
        return Vec3(float(parts[0]), float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _load_scenario_arg(path: str | None):
    if path is None:
        return default_scenario()
    return load_scenario(path)


def _flags_field(flags: tuple[str, ...]) -> str:
    return "|".join(flags) if flags else "-"


def cmd_init(args) -> int:
    scenario = default_scenario(name=args.name, seed=args.seed)
    save_scenario(scenario, args.scenario)
    print(f"wrote {args.scenario}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    if args.target is not None:
        direction = (args.target - args.start).normalized()
    elif args.direction is not None:
        direction = args.direction.normalized()
    else:
        print("error: one of --direction or --target is required", file=sys.stderr)
        return 2
    spec = GestureSpec(
        start=args.start,
        direction=direction,
        displacement=args.displacement,
        speed=args.speed,
        jitter_amplitude=scenario.gesture.jitter_amplitude,
        axis_wander=scenario.gesture.axis_wander,
        depth_wander=scenario.gesture.depth_wander,
    )
    noise = scenario.noise if args.seed is None else scenario.noise.with_seed(args.seed)
    truth, readings = generate_gesture(spec, noise, scenario.anchor)
    trace = [GestureTrace(id=args.gesture_id, readings=tuple(readings))]
    if args.out:
        write_trace(trace, args.out)
        print(f"wrote {len(readings)} readings to {args.out}", file=sys.stderr)
    else:
        from .traces import serialize_trace

        sys.stdout.write(serialize_trace(trace))
    return 0


def _ray_from_trace(path: str, gesture_id: str | None):
    gestures = read_trace(path)
    if not gestures:
        raise PointselError(f"{path}: no gestures in trace")
    if gesture_id is None:
        gesture = gestures[0]
    else:
        matches = [g for g in gestures if g.id == gesture_id]
        if not matches:
            raise PointselError(f"{path}: no gesture {gesture_id!r}")
        gesture = matches[0]
    return estimate_pointing(list(gesture.readings))


def cmd_estimate(args) -> int:
    ray = _ray_from_trace(args.trace, args.gesture)
    quality = gesture_quality(ray)
    origin = ray.origin
    print("direction_x,direction_y,direction_z,origin_x_m,origin_y_m,origin_z_m,"
          "net_displacement_m,mean_speed_mps,explained_variance_ratio,flags")
    print(f"{ray.direction.x!r},{ray.direction.y!r},{ray.direction.z!r},"
          f"{origin.x!r},{origin.y!r},{origin.z!r},"
          f"{ray.net_displacement!r},{ray.mean_speed!r},"
          f"{ray.explained_variance_ratio!r},{_flags_field(quality.flags)}")
    return 0


def cmd_register(args) -> int:
    if args.scenario is None:
        print("error: --scenario is required for register", file=sys.stderr)
        return 2
    scenario = load_scenario(args.scenario)
    ray1 = _ray_from_trace(args.trace1, None)
    ray2 = _ray_from_trace(args.trace2, None)

    print("outcome,id,label,x_m,y_m,z_m,gap_m,angle_deg,hint")
    separation = user_separation_check(ray1.origin, ray2.origin)
    if separation is not None:
        print(f"guidance,,,,,,,,{separation.hint}")
        print(
            f"user positions only {separation.separation:.2f} m apart; "
            "move farther before the second gesture",
            file=sys.stderr,
        )
        return 0
    outcome = register_device(scenario.catalog, args.label, ray1, ray2)
    if isinstance(outcome, GuidanceNeeded):
        angle = "" if outcome.angle is None else repr(rad_to_deg(outcome.angle))
        print(f"guidance,,,,,,,{angle},{outcome.hint}")
        print(f"registration refused: {outcome.reason}", file=sys.stderr)
        return 0
    record: DeviceRecord = outcome
    save_scenario(scenario, args.scenario)
    print(f"registered,{record.id},{record.label},{record.position.x!r},"
          f"{record.position.y!r},{record.position.z!r},{record.registration_gap!r},"
          f"{rad_to_deg(record.registration_angle)!r},-")
    return 0


def cmd_select(args) -> int:
    if args.scenario is None:
        print("error: --scenario is required for select", file=sys.stderr)
        return 2
    scenario = load_scenario(args.scenario)
    ray = _ray_from_trace(args.trace, args.gesture)
    result = select(ray, scenario.devices)
    ranked = " ".join(f"{dev_id}:{score!r}" for dev_id, score in result.ranked)
    if isinstance(result.chosen, Ambiguous):
        chosen = "ambiguous"
        candidates = "|".join(result.chosen.candidates)
    else:
        chosen = result.chosen
        candidates = chosen
    print("chosen,candidates,ranked")
    print(f"{chosen},{candidates},{ranked}")
    return 0


def cmd_sweep(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    grid = [float(v) for v in args.grid.split(",")] if args.grid else None
    if args.axis in DEFAULT_GRIDS:
        report = run_direction_sweep(scenario, axis=args.axis, grid=grid,
                                     trials=args.trials, seed=args.seed)
    elif args.axis == "resolution":
        report = run_resolution_sweep(scenario, ranges=grid, trials=args.trials,
                                      seed=args.seed)
    elif args.axis == "registration":
        report = run_registration_sweep(scenario, angles_deg=grid, trials=args.trials,
                                        seed=args.seed)
    else:
        print(f"error: unknown axis {args.axis!r}", file=sys.stderr)
        return 2
    sys.stdout.write(report.to_csv())
    return 0


def cmd_calibrate(args) -> int:
    if args.scenario is None:
        print("error: --scenario is required for calibrate", file=sys.stderr)
        return 2
    scenario = load_scenario(args.scenario)
    calibrate(scenario, target_median_deg=args.target_median_deg,
              trials_per_cell=args.trials, seed=args.seed)
    save_scenario(scenario, args.scenario)
    cal = scenario.calibration
    print("target_median_deg,achieved_median_deg,scale,trials,seed")
    print(f"{cal.target_median_deg!r},{cal.achieved_median_deg!r},"
          f"{cal.scale!r},{cal.trials},{cal.seed}")
    print(f"calibrated noise written to {args.scenario}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .gateway.app import create_app

    app = create_app(scenario_dir=args.scenario_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Single-anchor UWB pointing: simulate, estimate, register, select.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="write a fresh default scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--name", default="default")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("simulate", help="generate a synthetic gesture trace")
    p.add_argument("--scenario")
    p.add_argument("--start", type=_parse_vec3, required=True, metavar="X,Y,Z")
    p.add_argument("--direction", type=_parse_vec3, metavar="X,Y,Z")
    p.add_argument("--target", type=_parse_vec3, metavar="X,Y,Z")
    p.add_argument("--displacement", type=float, default=0.2)
    p.add_argument("--speed", type=float, default=0.1)
    p.add_argument("--seed", type=int)
    p.add_argument("--gesture-id", default="g1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate the pointing ray of a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--gesture")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("register", help="register a device from two gesture traces")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trace1", required=True)
    p.add_argument("--trace2", required=True)
    p.add_argument("--label", required=True)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("select", help="select the pointed-at device")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--gesture")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("sweep", help="run a benchmark sweep, CSV to stdout")
    p.add_argument("--axis", required=True,
                   choices=sorted(DEFAULT_GRIDS) + ["resolution", "registration"])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--scenario")
    p.add_argument("--grid", help="comma-separated cell values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("calibrate", help="fit the noise profile to a target median error")
    p.add_argument("--scenario", required=True)
    p.add_argument("--target-median-deg", type=float, default=DEFAULT_CALIBRATION_TARGET_DEG)
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", help="run the session gateway")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8800)
    p.add_argument("--scenario-dir", default=".")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PointselError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
