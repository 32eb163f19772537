"""Physics stand-in for the rover: motors, encoders, differential drive.

Each wheel's speed relaxes first-order toward the speed its PWM duty
commands; the pose integrates standard differential-drive kinematics with
explicit Euler steps. Encoders are unsigned tick counters (single-channel
optical), so measured speed takes its sign from the last commanded
direction. A stalled wheel holds speed zero no matter the PWM.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .geometry import Pose2D, wrap_angle


class Wheel(enum.Enum):
    RIGHT = "right"
    LEFT = "left"


@dataclass(frozen=True)
class RobotParams:
    wheel_radius: float = 0.03
    track_width: float = 0.2
    max_wheel_speed: float = 40.0
    motor_time_constant: float = 0.15
    encoder_ticks_per_rev: int = 360
    pwm_full_scale: float = 1023.0

    def __post_init__(self) -> None:
        for name in (
            "wheel_radius",
            "track_width",
            "max_wheel_speed",
            "motor_time_constant",
            "encoder_ticks_per_rev",
            "pwm_full_scale",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class PlantState:
    """Full physical state. rotation_* accumulate |wheel angle| in radians;
    encoder counts are their tick-quantized (truncated) images."""

    pose: Pose2D = Pose2D(0.0, 0.0, 0.0)
    omega_right: float = 0.0
    omega_left: float = 0.0
    encoder_right: int = 0
    encoder_left: int = 0
    stalled_right: bool = False
    stalled_left: bool = False
    rotation_right: float = 0.0
    rotation_left: float = 0.0
    dir_right: int = 1
    dir_left: int = 1


def _wheel_step(
    omega: float, pwm: float, stalled: bool, params: RobotParams, dt: float
) -> float:
    if stalled:
        return 0.0
    duty = max(-params.pwm_full_scale, min(params.pwm_full_scale, pwm))
    target = duty / params.pwm_full_scale * params.max_wheel_speed
    omega += (target - omega) * dt / params.motor_time_constant
    return max(-params.max_wheel_speed, min(params.max_wheel_speed, omega))


def step_plant(
    state: PlantState,
    params: RobotParams,
    pwm_right: float,
    pwm_left: float,
    dt: float,
) -> PlantState:
    """Advance the plant one Euler step of length dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    omega_r = _wheel_step(state.omega_right, pwm_right, state.stalled_right, params, dt)
    omega_l = _wheel_step(state.omega_left, pwm_left, state.stalled_left, params, dt)

    v = params.wheel_radius * (omega_r + omega_l) / 2.0
    omega_body = params.wheel_radius * (omega_r - omega_l) / params.track_width
    pose = state.pose
    new_pose = Pose2D(
        pose.x + v * math.cos(pose.theta) * dt,
        pose.y + v * math.sin(pose.theta) * dt,
        wrap_angle(pose.theta + omega_body * dt),
    )

    rotation_r = state.rotation_right + abs(omega_r) * dt
    rotation_l = state.rotation_left + abs(omega_l) * dt
    ticks_per_rad = params.encoder_ticks_per_rev / math.tau
    return replace(
        state,
        pose=new_pose,
        omega_right=omega_r,
        omega_left=omega_l,
        rotation_right=rotation_r,
        rotation_left=rotation_l,
        encoder_right=int(rotation_r * ticks_per_rad),
        encoder_left=int(rotation_l * ticks_per_rad),
        dir_right=(1 if pwm_right > 0 else -1) if pwm_right != 0 else state.dir_right,
        dir_left=(1 if pwm_left > 0 else -1) if pwm_left != 0 else state.dir_left,
    )


def read_encoders(
    state: PlantState, prev: PlantState, params: RobotParams, dt: float
) -> tuple[float, float]:
    """Wheel speeds in rad/s recovered from encoder tick deltas over dt.

    Quantization error is at most one tick per interval. The sign comes
    from the last nonzero commanded direction, since the counters only
    accumulate magnitude.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    rad_per_tick = math.tau / params.encoder_ticks_per_rev
    measured_r = (state.encoder_right - prev.encoder_right) * rad_per_tick / dt
    measured_l = (state.encoder_left - prev.encoder_left) * rad_per_tick / dt
    return measured_r * state.dir_right, measured_l * state.dir_left


def set_stall(state: PlantState, wheel: Wheel, stalled: bool) -> PlantState:
    """Set or clear a wheel's stall flag; a freshly stalled wheel stops dead."""
    if wheel is Wheel.RIGHT:
        return replace(
            state,
            stalled_right=stalled,
            omega_right=0.0 if stalled else state.omega_right,
        )
    return replace(
        state,
        stalled_left=stalled,
        omega_left=0.0 if stalled else state.omega_left,
    )
