"""Command-line entry points for calibration, the experiments, and the servers."""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path

from .calibration import CalibrationError, calibrate, load_pairs
from .geometry import Pose2D, WorldPoint
from .harness import (
    ConfigError,
    GoalScenario,
    SimConfig,
    TrackScenario,
    experiment1,
    experiment2,
    fmt,
    parse_config,
    run_sim,
    trajectory_csv,
    trials_csv,
)
from .navigation import SineKind, Track, gen_sine_track, load_track
from .netlink import CONTROLLER_PORT, UI_BRIDGE_PORT

log = logging.getLogger(__name__)


def _load_config(path: str | None) -> tuple[SimConfig, dict[str, str]]:
    if path is None:
        return SimConfig(), {}
    return parse_config(Path(path).read_text())


def _write(out_dir: str, name: str, content: str) -> Path:
    target = Path(out_dir) / name
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(content)
    return target


def cmd_calibrate(args: argparse.Namespace) -> int:
    try:
        result = calibrate(load_pairs(Path(args.pairs_file).read_text()))
    except (CalibrationError, ValueError) as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return 1
    print(f"scale={fmt(result.scale)} px/m")
    print(f"origin_x={fmt(result.origin_x)} m")
    print(f"origin_y={fmt(result.origin_y)} m")
    print(f"residual_rms={fmt(result.residual_rms)} px")
    return 0


def cmd_exp1(args: argparse.Namespace) -> int:
    config, _ = _load_config(args.config)
    if args.noise_free:
        config = config.noise_free()
    summary = experiment1(config, args.trials, args.seed)
    path = _write(args.out_dir, "trials.csv", trials_csv(summary))
    if summary.n_converged < summary.n_trials:
        print(
            f"warning: {summary.n_trials - summary.n_converged} trial(s) did not "
            "converge and are excluded from the mean",
            file=sys.stderr,
        )
    print(f"mean={fmt(summary.mean_error)} std={fmt(summary.std_error)}")
    log.info("wrote %s", path)
    return 0


_KIND_NAMES = {k.value: k for k in SineKind}


def cmd_exp2(args: argparse.Namespace) -> int:
    config, _ = _load_config(args.config)
    if args.noise_free:
        config = config.noise_free()
    summary = experiment2(config, _KIND_NAMES[args.kind], args.seed)
    path = _write(args.out_dir, "trajectory.csv", trajectory_csv(summary.result))
    if not summary.converged:
        print("warning: tracking did not reach the end of the track", file=sys.stderr)
    devs = [row.delta_d for row in summary.result.trajectory]
    import math

    std = math.sqrt(sum((d - summary.mean_deviation) ** 2 for d in devs) / len(devs))
    print(f"mean={fmt(summary.mean_deviation)} std={fmt(std)}")
    log.info("wrote %s", path)
    return 0


def cmd_sim(args: argparse.Namespace) -> int:
    config, scenario_keys = _load_config(args.config)
    kind = scenario_keys.get("scenario", "goal")
    start = None
    if "start_x" in scenario_keys:
        start = Pose2D(
            float(scenario_keys["start_x"]),
            float(scenario_keys.get("start_y", "0")),
            float(scenario_keys.get("start_theta", "0")),
        )
    if kind == "goal":
        goal = WorldPoint(
            float(scenario_keys.get("goal_x", "1.0")),
            float(scenario_keys.get("goal_y", "0.0")),
        )
        scenario = GoalScenario(start or Pose2D(0.0, 0.0, 0.0), goal)
    elif kind == "track":
        if args.track:
            track = load_track(Path(args.track).read_text())
        else:
            track_kind = _KIND_NAMES[scenario_keys.get("track_kind", "half")]
            track = gen_sine_track(
                track_kind, config.track_amplitude, config.track_span, config.track_samples
            )
        scenario = TrackScenario(track, start=start)
    else:
        print(f"unknown scenario {kind!r}", file=sys.stderr)
        return 2
    result = run_sim(config, scenario)
    _write(args.out_dir, "trajectory.csv", trajectory_csv(result))
    metric = result.final_error if result.final_error is not None else result.mean_deviation
    status = "converged" if result.converged else "not-converged"
    print(f"{status} metric={fmt(metric)} elapsed={fmt(result.elapsed)}")
    return 0 if result.converged else 3


def cmd_serve_controller(args: argparse.Namespace) -> int:
    from .server import ControllerServer

    config, _ = _load_config(args.config)

    async def main() -> None:
        server = ControllerServer(
            config, host=args.host, port=args.port, time_scale=args.time_scale
        )
        await server.start()
        print(f"controller listening on {args.host}:{server.bound_port}")
        await asyncio.Event().wait()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    return 0


def cmd_serve_positioning(args: argparse.Namespace) -> int:
    from .server import ControllerServer, PositioningServer

    config, _ = _load_config(args.config)

    async def main() -> None:
        controller_port = args.controller_port
        embedded = None
        if args.embedded_robot:
            embedded = ControllerServer(config, port=0, time_scale=args.time_scale)
            await embedded.start()
            controller_port = embedded.bound_port
            print(f"embedded robot controller on port {controller_port}")
        server = PositioningServer(
            config,
            controller_host=args.controller_host,
            controller_port=controller_port,
            ui_host=args.host,
            ui_port=args.ui_port,
        )
        await server.start()
        print(f"positioning up; UI bridge ws://{args.host}:{server.bound_ui_port}/ws")
        sys.stdout.flush()
        await asyncio.Event().wait()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camnav",
        description="Indoor robot navigation simulator: camera positioning, "
        "PID motor control, goal steering and trajectory tracking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit camera parameters from a pairs file")
    p.add_argument("pairs_file", help="text file with 'X Y u v' per line")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("exp1", help="goal-steering precision over random trials")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--noise-free", action="store_true")
    p.add_argument("--config", default=None)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_exp1)

    p = sub.add_parser("exp2", help="sine-track trajectory tracking")
    p.add_argument("--kind", choices=sorted(_KIND_NAMES), required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--noise-free", action="store_true")
    p.add_argument("--config", default=None)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_exp2)

    p = sub.add_parser("sim", help="run one scenario described by a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--track", default=None, help="track file overriding the config")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("serve-controller", help="run the robot controller endpoint")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=CONTROLLER_PORT)
    p.add_argument("--time-scale", type=float, default=1.0)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_serve_controller)

    p = sub.add_parser(
        "serve-positioning", help="run the positioning server and UI bridge"
    )
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=CONTROLLER_PORT, dest="controller_port")
    p.add_argument("--controller-host", default="127.0.0.1")
    p.add_argument("--ui-port", type=int, default=UI_BRIDGE_PORT)
    p.add_argument(
        "--embedded-robot",
        action="store_true",
        help="also run a simulated robot controller in this process",
    )
    p.add_argument("--time-scale", type=float, default=1.0)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_serve_positioning)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
