"""Firmware-side control: command decoding and the anti-windup PID loop.

One PID instance runs per wheel at 10 Hz. The update order inside a step
is fixed and normative: integrate the new error, decay the integrator if
the error magnitude exceeds the anti-windup threshold, clamp the
integrator, then form the output.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

TURN_SPEED = 10.0
FORWARD_SPEED = 10.0
DEFAULT_MAX_SETPOINT = 40.0


class CommandError(Exception):
    """A motor command failed validation."""


class CommandKind(enum.Enum):
    TURN = "turn"
    FORWARD = "forward"
    STOP = "stop"
    SPEED = "speed"


@dataclass(frozen=True)
class MotorCommand:
    """A wheel-speed command as carried on the wire.

    turn/forward may carry explicit wheel speeds; stop never does; speed
    always does.
    """

    kind: CommandKind
    u_right: float | None = None
    u_left: float | None = None

    @classmethod
    def stop(cls) -> "MotorCommand":
        return cls(CommandKind.STOP)

    @classmethod
    def forward(cls, speed: float = FORWARD_SPEED) -> "MotorCommand":
        return cls(CommandKind.FORWARD, u_right=speed, u_left=speed)

    @classmethod
    def turn(cls, direction: int = 1, speed: float = TURN_SPEED) -> "MotorCommand":
        """Positive direction spins the robot counterclockwise."""
        sign = 1.0 if direction >= 0 else -1.0
        return cls(CommandKind.TURN, u_right=sign * speed, u_left=-sign * speed)

    @classmethod
    def speed(cls, u_right: float, u_left: float) -> "MotorCommand":
        return cls(CommandKind.SPEED, u_right=u_right, u_left=u_left)


@dataclass(frozen=True)
class PidConfig:
    """Controller gains and anti-windup parameters (shipped defaults are the
    empirically tuned set: Kp=1.2, Kd=0.05, Ki=3, threshold 10, decay 0.4,
    clamp 100, at 10 Hz)."""

    kp: float = 1.2
    kd: float = 0.05
    ki: float = 3.0
    l_anti: float = 10.0
    alpha_decay: float = 0.4
    beta_anti: float = 100.0
    output_limit: float = 1023.0
    period: float = 0.1

    def __post_init__(self) -> None:
        if self.kp < 0 or self.kd < 0 or self.ki < 0:
            raise ValueError("gains must be non-negative")
        if not (0.0 < self.alpha_decay < 1.0):
            raise ValueError("alpha_decay must lie in (0, 1)")
        if self.beta_anti <= 0:
            raise ValueError("beta_anti must be positive")
        if self.period <= 0:
            raise ValueError("period must be positive")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0


def pid_step(
    config: PidConfig, state: PidState, setpoint: float, measured: float
) -> tuple[float, PidState]:
    """One PID update; returns (pwm, new state)."""
    error = setpoint - measured
    integral = state.integral + error * config.period
    if abs(error) > config.l_anti:
        integral *= config.alpha_decay
    integral = max(-config.beta_anti, min(config.beta_anti, integral))
    derivative = (error - state.prev_error) / config.period
    output = config.kp * error + config.ki * integral + config.kd * derivative
    output = max(-config.output_limit, min(config.output_limit, output))
    return output, PidState(integral=integral, prev_error=error)


def command_to_setpoints(
    cmd: MotorCommand, max_speed: float = DEFAULT_MAX_SETPOINT
) -> tuple[float, float]:
    """Wheel-speed setpoints (right, left) in rad/s for a command.

    A bare turn spins counterclockwise at the standard 10 rad/s; a bare
    forward drives both wheels at 10 rad/s. Speed commands are passed
    through after range checking against the plant limit.
    """
    if cmd.kind is CommandKind.STOP:
        return 0.0, 0.0
    if cmd.kind is CommandKind.TURN:
        if cmd.u_right is None or cmd.u_left is None:
            return TURN_SPEED, -TURN_SPEED
        return cmd.u_right, cmd.u_left
    if cmd.kind is CommandKind.FORWARD:
        if cmd.u_right is None or cmd.u_left is None:
            return FORWARD_SPEED, FORWARD_SPEED
        return cmd.u_right, cmd.u_left
    if cmd.u_right is None or cmd.u_left is None:
        raise CommandError("speed command requires both wheel speeds")
    for u in (cmd.u_right, cmd.u_left):
        if not math.isfinite(u) or abs(u) > max_speed:
            raise CommandError(f"wheel speed {u!r} outside +/-{max_speed} rad/s")
    return cmd.u_right, cmd.u_left


def controller_tick(
    config: PidConfig,
    states: tuple[PidState, PidState],
    cmd: MotorCommand,
    measured_right: float,
    measured_left: float,
    max_speed: float = DEFAULT_MAX_SETPOINT,
) -> tuple[float, float, tuple[PidState, PidState]]:
    """One 10 Hz firmware tick: command to setpoints, then a PID step per wheel."""
    sp_right, sp_left = command_to_setpoints(cmd, max_speed)
    pwm_right, state_right = pid_step(config, states[0], sp_right, measured_right)
    pwm_left, state_left = pid_step(config, states[1], sp_left, measured_left)
    return pwm_right, pwm_left, (state_right, state_left)
