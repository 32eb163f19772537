"""Deterministic fixed-timestep orchestration of the full closed loop.

One master loop steps the plant at 100 Hz. Every camera period it renders
the marker discs from the true pose, runs the vision pipeline on the
frame, lets the navigation layer decide, and sends the command through an
in-process loopback link with the configured latency. Every PID period the
controller side reads the encoders and updates the wheel PWMs. All noise
flows from one seeded generator, so a (config, seed) pair fully determines
every output byte.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import CalibrationResult
from .controller import MotorCommand, CommandKind, PidConfig, PidState
from .controller import controller_tick
from .geometry import Pose2D, WorldPoint
from .navigation import (
    GoalSteerConfig,
    NavPhase,
    SineKind,
    Track,
    TrackerConfig,
    gen_sine_track,
    nearest_track_point,
    steer_step,
    tracker_step,
)
from .netlink import CommandGate, LoopbackLink, WireMessage
from .plant import PlantState, RobotParams, read_encoders, step_plant
from .vision import CameraModel, MarkerLayout, MarkerNotDetectedError, estimate_pose, render_markers

EXP1_MAX_TIME = 120.0
EXP2_MAX_TIME = 900.0


class ConfigError(Exception):
    """Bad simulation configuration or scenario."""


def default_camera(
    arena_width: float = 4.0,
    arena_height: float = 3.0,
    image_width: int = 640,
    image_height: int = 480,
) -> CameraModel:
    """Camera centered over the arena, scaled so the arena fills the frame."""
    scale = min(image_width / arena_width, image_height / arena_height)
    return CameraModel(
        scale=scale,
        origin_x=-arena_width / 2.0,
        origin_y=-arena_height / 2.0,
        image_width=image_width,
        image_height=image_height,
    )


@dataclass(frozen=True)
class SimConfig:
    physics_dt: float = 0.01
    pid_period: float = 0.1
    camera_period: float = 0.03
    pixel_noise_std: float = 1.0
    command_latency: float = 0.05
    rng_seed: int = 0
    arena_width: float = 4.0
    arena_height: float = 3.0
    goal_margin: float = 0.3
    max_time: float = EXP1_MAX_TIME
    track_amplitude: float = 0.5
    track_span: float = 2.0
    track_samples: int = 200
    robot: RobotParams = field(default_factory=RobotParams)
    pid: PidConfig = field(default_factory=PidConfig)
    steer: GoalSteerConfig = field(default_factory=GoalSteerConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    camera: CameraModel = field(default_factory=default_camera)
    layout: MarkerLayout = field(default_factory=MarkerLayout)

    def __post_init__(self) -> None:
        if self.physics_dt <= 0:
            raise ConfigError("physics_dt must be positive")
        for name in ("pid_period", "camera_period"):
            period = getattr(self, name)
            ratio = period / self.physics_dt
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ConfigError(f"{name} must be an integer multiple of physics_dt")
        if self.pid.period != self.pid_period:
            object.__setattr__(self, "pid", replace(self.pid, period=self.pid_period))

    def in_arena(self, x: float, y: float) -> bool:
        return abs(x) <= self.arena_width / 2.0 and abs(y) <= self.arena_height / 2.0

    def noise_free(self) -> "SimConfig":
        return replace(self, pixel_noise_std=0.0, command_latency=0.0)


@dataclass(frozen=True)
class GoalScenario:
    start: Pose2D
    goal: WorldPoint


@dataclass(frozen=True)
class TrackScenario:
    track: Track
    start: Pose2D | None = None  # default: first track point, heading along it


@dataclass(frozen=True)
class LogRow:
    t: float
    x: float
    y: float
    theta: float
    target_x: float
    target_y: float
    delta_d: float


@dataclass(frozen=True)
class TrialResult:
    converged: bool
    elapsed: float
    final_error: float | None = None
    mean_deviation: float | None = None
    trajectory: tuple[LogRow, ...] = ()


def _track_start_pose(track: Track) -> Pose2D:
    p0, p1 = track.points[0], track.points[1]
    return Pose2D(p0.x, p0.y, math.atan2(p1.y - p0.y, p1.x - p0.x))


def run_sim(
    config: SimConfig,
    scenario: GoalScenario | TrackScenario,
    max_time: float | None = None,
) -> TrialResult:
    """Run one closed-loop trial to its stop command or the time limit."""
    if max_time is None:
        max_time = config.max_time
    if isinstance(scenario, GoalScenario):
        if not config.in_arena(scenario.goal.x, scenario.goal.y):
            raise ConfigError(f"goal {scenario.goal} outside the arena")
        if not config.in_arena(scenario.start.x, scenario.start.y):
            raise ConfigError(f"start {scenario.start} outside the arena")
        start_pose = scenario.start
        goal = scenario.goal
        track = None
    else:
        track = scenario.track
        for p in track.points:
            if not config.in_arena(p.x, p.y):
                raise ConfigError(f"track point {p} outside the arena")
        start_pose = scenario.start if scenario.start is not None else _track_start_pose(track)
        goal = None

    rng = np.random.default_rng(config.rng_seed)
    plant = PlantState(pose=start_pose)
    plant_at_last_pid = plant
    pid_states = (PidState(), PidState())
    gate = CommandGate()
    link = LoopbackLink(latency=config.command_latency)
    phase = NavPhase.ALIGNING
    pwm = (0.0, 0.0)
    seq = 0
    track_arr = (
        np.array([(p.x, p.y) for p in track.points]) if track is not None else None
    )

    n_cam = round(config.camera_period / config.physics_dt)
    n_pid = round(config.pid_period / config.physics_dt)
    n_steps = int(round(max_time / config.physics_dt))
    rows: list[LogRow] = []
    devs: list[float] = []
    stop_decided = False
    now = 0.0

    for k in range(n_steps + 1):
        now = k * config.physics_dt

        if k % n_cam == 0:
            pose = plant.pose
            if track_arr is not None:
                true_dev = float(
                    np.min(np.hypot(track_arr[:, 0] - pose.x, track_arr[:, 1] - pose.y))
                )
                devs.append(true_dev)
                i, _, _ = nearest_track_point(pose.position(), track)
                target = track.points[i]
                rows.append(
                    LogRow(now, pose.x, pose.y, pose.theta, target.x, target.y, true_dev)
                )
            else:
                true_err = math.hypot(goal.x - pose.x, goal.y - pose.y)
                rows.append(
                    LogRow(now, pose.x, pose.y, pose.theta, goal.x, goal.y, true_err)
                )

            frame = render_markers(
                config.camera, pose, config.layout, config.pixel_noise_std, rng
            )
            try:
                est = estimate_pose(config.camera, frame)
            except MarkerNotDetectedError:
                est = None  # robot out of view; dead-man will stop the wheels
            if est is not None:
                if goal is not None:
                    cmd, phase = steer_step(est, goal, phase, config.steer)
                    if phase is NavPhase.DONE:
                        stop_decided = True
                else:
                    cmd = tracker_step(est, track, config.tracker)
                    if cmd.kind is CommandKind.STOP:
                        stop_decided = True
                seq += 1
                link.send(WireMessage.command(seq, cmd), now)
            if stop_decided:
                break

        for msg in link.poll(now):
            gate.offer(msg, now)

        if k % n_pid == 0:
            measured_r, measured_l = read_encoders(
                plant, plant_at_last_pid, config.robot, config.pid_period
            )
            plant_at_last_pid = plant
            pwm_r, pwm_l, pid_states = controller_tick(
                config.pid,
                pid_states,
                gate.effective(now),
                measured_r,
                measured_l,
                max_speed=config.robot.max_wheel_speed,
            )
            pwm = (pwm_r, pwm_l)

        plant = step_plant(plant, config.robot, pwm[0], pwm[1], config.physics_dt)

    pose = plant.pose
    if goal is not None:
        return TrialResult(
            converged=stop_decided,
            elapsed=now,
            final_error=math.hypot(goal.x - pose.x, goal.y - pose.y),
            trajectory=tuple(rows),
        )
    return TrialResult(
        converged=stop_decided,
        elapsed=now,
        mean_deviation=float(np.mean(devs)) if devs else 0.0,
        trajectory=tuple(rows),
    )


@dataclass(frozen=True)
class Exp1Summary:
    mean_error: float
    std_error: float
    n_converged: int
    n_trials: int
    results: tuple[TrialResult, ...]


def experiment1(config: SimConfig, n_trials: int, seed: int) -> Exp1Summary:
    """Random start/goal steering trials; metrics use true plant pose."""
    if n_trials < 1:
        raise ConfigError("n_trials must be at least 1")
    rng = np.random.default_rng(seed)
    half_w = config.arena_width / 2.0 - config.goal_margin
    half_h = config.arena_height / 2.0 - config.goal_margin
    results = []
    for _ in range(n_trials):
        start = Pose2D(
            float(rng.uniform(-half_w, half_w)),
            float(rng.uniform(-half_h, half_h)),
            float(rng.uniform(-math.pi, math.pi)),
        )
        goal = WorldPoint(
            float(rng.uniform(-half_w, half_w)),
            float(rng.uniform(-half_h, half_h)),
        )
        trial_config = replace(config, rng_seed=int(rng.integers(2**31)))
        results.append(
            run_sim(trial_config, GoalScenario(start, goal), max_time=EXP1_MAX_TIME)
        )
    errors = [r.final_error for r in results if r.converged]
    mean = float(np.mean(errors)) if errors else math.nan
    std = float(np.std(errors)) if errors else math.nan
    return Exp1Summary(
        mean_error=mean,
        std_error=std,
        n_converged=len(errors),
        n_trials=n_trials,
        results=tuple(results),
    )


@dataclass(frozen=True)
class Exp2Summary:
    kind: SineKind
    mean_deviation: float
    converged: bool
    result: TrialResult


def experiment2(config: SimConfig, kind: SineKind, seed: int) -> Exp2Summary:
    """Sine-track tracking trial starting on the track's first point."""
    track = gen_sine_track(
        kind, config.track_amplitude, config.track_span, config.track_samples
    )
    # Center the track in the arena so the whole arc is in view.
    xs = [p.x for p in track.points]
    ys = [p.y for p in track.points]
    shift_x = -(min(xs) + max(xs)) / 2.0
    shift_y = -(min(ys) + max(ys)) / 2.0
    track = Track(points=tuple(WorldPoint(p.x + shift_x, p.y + shift_y) for p in track.points))
    trial_config = replace(config, rng_seed=seed)
    result = run_sim(trial_config, TrackScenario(track), max_time=EXP2_MAX_TIME)
    return Exp2Summary(
        kind=kind,
        mean_deviation=result.mean_deviation,
        converged=result.converged,
        result=result,
    )


def fmt(value: float) -> str:
    """Fixed 6-significant-digit rendering used by every CSV and summary."""
    return f"{value:.6g}"


def trials_csv(summary: Exp1Summary) -> str:
    out = io.StringIO()
    out.write("trial,final_error_m,elapsed_s\n")
    for i, r in enumerate(summary.results):
        error = fmt(r.final_error) if r.converged else "nan"
        out.write(f"{i},{error},{fmt(r.elapsed)}\n")
    return out.getvalue()


def trajectory_csv(result: TrialResult) -> str:
    out = io.StringIO()
    out.write("t,x,y,theta,target_x,target_y,delta_d\n")
    for row in result.trajectory:
        out.write(
            ",".join(
                fmt(v)
                for v in (
                    row.t,
                    row.x,
                    row.y,
                    row.theta,
                    row.target_x,
                    row.target_y,
                    row.delta_d,
                )
            )
            + "\n"
        )
    return out.getvalue()


# Flat config-file key -> (section, attribute, parser). Section None means a
# direct SimConfig field.
_INT = int
_FLOAT = float
_CONFIG_KEYS: dict[str, tuple[str | None, str, type]] = {
    "physics_dt": (None, "physics_dt", _FLOAT),
    "pid_period": (None, "pid_period", _FLOAT),
    "camera_period": (None, "camera_period", _FLOAT),
    "pixel_noise_std": (None, "pixel_noise_std", _FLOAT),
    "command_latency": (None, "command_latency", _FLOAT),
    "rng_seed": (None, "rng_seed", _INT),
    "arena_width": (None, "arena_width", _FLOAT),
    "arena_height": (None, "arena_height", _FLOAT),
    "goal_margin": (None, "goal_margin", _FLOAT),
    "max_time": (None, "max_time", _FLOAT),
    "track_amplitude": (None, "track_amplitude", _FLOAT),
    "track_span": (None, "track_span", _FLOAT),
    "track_samples": (None, "track_samples", _INT),
    "wheel_radius": ("robot", "wheel_radius", _FLOAT),
    "track_width": ("robot", "track_width", _FLOAT),
    "max_wheel_speed": ("robot", "max_wheel_speed", _FLOAT),
    "motor_time_constant": ("robot", "motor_time_constant", _FLOAT),
    "encoder_ticks_per_rev": ("robot", "encoder_ticks_per_rev", _INT),
    "pwm_full_scale": ("robot", "pwm_full_scale", _FLOAT),
    "kp": ("pid", "kp", _FLOAT),
    "kd": ("pid", "kd", _FLOAT),
    "ki": ("pid", "ki", _FLOAT),
    "l_anti": ("pid", "l_anti", _FLOAT),
    "alpha_decay": ("pid", "alpha_decay", _FLOAT),
    "beta_anti": ("pid", "beta_anti", _FLOAT),
    "output_limit": ("pid", "output_limit", _FLOAT),
    "accept_radius": ("steer", "accept_radius", _FLOAT),
    "align_tolerance": ("steer", "align_tolerance", _FLOAT),
    "turn_speed": ("steer", "turn_speed", _FLOAT),
    "forward_speed": ("steer", "forward_speed", _FLOAT),
    "theta_d": ("tracker", "theta_d", _FLOAT),
    "v_m": ("tracker", "v_m", _FLOAT),
    "kp_t": ("tracker", "kp_t", _FLOAT),
    "end_radius": ("tracker", "end_radius", _FLOAT),
    "control_offset": ("tracker", "control_offset", _FLOAT),
    "scale": ("camera", "scale", _FLOAT),
    "origin_x": ("camera", "origin_x", _FLOAT),
    "origin_y": ("camera", "origin_y", _FLOAT),
    "image_width": ("camera", "image_width", _INT),
    "image_height": ("camera", "image_height", _INT),
    "green_offset_x": ("layout", "green_offset", _FLOAT),
    "green_offset_y": ("layout", "green_offset", _FLOAT),
    "orange_offset_x": ("layout", "orange_offset", _FLOAT),
    "orange_offset_y": ("layout", "orange_offset", _FLOAT),
    "disc_radius": ("layout", "disc_radius", _FLOAT),
}

# Keys consumed by the `sim` subcommand rather than SimConfig itself.
SCENARIO_KEYS = ("scenario", "goal_x", "goal_y", "start_x", "start_y", "start_theta", "track_kind")


def parse_config(text: str) -> tuple[SimConfig, dict[str, str]]:
    """Parse the flat `key = value` config format.

    Returns the SimConfig plus any scenario-level keys for the caller.
    Unknown keys are rejected. If arena or frame dimensions change and no
    explicit camera parameters are given, the camera is re-derived to
    cover the arena.
    """
    direct: dict[str, object] = {}
    sections: dict[str, dict[str, object]] = {}
    scenario: dict[str, str] = {}
    layout_raw: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key in SCENARIO_KEYS:
            scenario[key] = value
            continue
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        section, attr, parser = _CONFIG_KEYS[key]
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
        if section == "layout" and attr in ("green_offset", "orange_offset"):
            layout_raw[key] = parsed
        elif section is None:
            direct[attr] = parsed
        else:
            sections.setdefault(section, {})[attr] = parsed

    defaults = SimConfig()
    kwargs: dict[str, object] = dict(direct)
    for section in ("robot", "pid", "steer", "tracker", "layout"):
        overrides = sections.get(section, {})
        if section == "layout" or overrides or layout_raw:
            base = getattr(defaults, section)
            if section == "layout":
                green = (
                    layout_raw.get("green_offset_x", base.green_offset[0]),
                    layout_raw.get("green_offset_y", base.green_offset[1]),
                )
                orange = (
                    layout_raw.get("orange_offset_x", base.orange_offset[0]),
                    layout_raw.get("orange_offset_y", base.orange_offset[1]),
                )
                if layout_raw or overrides:
                    kwargs["layout"] = MarkerLayout(
                        green_offset=green,
                        orange_offset=orange,
                        disc_radius=overrides.get("disc_radius", base.disc_radius),
                    )
            else:
                kwargs[section] = replace(base, **overrides)
    camera_overrides = sections.get("camera", {})
    if camera_overrides:
        base_cam = default_camera(
            float(kwargs.get("arena_width", defaults.arena_width)),
            float(kwargs.get("arena_height", defaults.arena_height)),
            int(camera_overrides.get("image_width", 640)),
            int(camera_overrides.get("image_height", 480)),
        )
        kwargs["camera"] = replace(base_cam, **camera_overrides)
    elif "arena_width" in kwargs or "arena_height" in kwargs:
        kwargs["camera"] = default_camera(
            float(kwargs.get("arena_width", defaults.arena_width)),
            float(kwargs.get("arena_height", defaults.arena_height)),
        )
    return replace(defaults, **kwargs), scenario


def camera_from_calibration(
    result: CalibrationResult, image_width: int = 640, image_height: int = 480
) -> CameraModel:
    return result.camera(image_width, image_height)
