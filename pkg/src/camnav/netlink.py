"""Wire protocol for the positioning-server / robot-controller link.

Frames are single UTF-8 JSON objects terminated by a newline, so streams
are self-delimiting and trivially debuggable. Numbers are rendered with at
most 6 significant digits; that precision is the wire contract, and
encode/decode round-trips exactly on values already at wire precision.

Keys: `kind`, `seq`, then per kind:
  cmd   -> `cmd` in {turn, forward, stop, speed}, optional u_right/u_left
  pose  -> x, y, theta, t
  goal  -> x, y
  track -> points as a flat [x0, y0, x1, y1, ...] array
  ack/error -> ref_seq, optional detail
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field

from .controller import CommandKind, MotorCommand

log = logging.getLogger(__name__)

CONTROLLER_PORT = 7011
UI_BRIDGE_PORT = 7012
UI_BRIDGE_PATH = "/ws"
DEADMAN_TIMEOUT = 0.5


class FrameError(Exception):
    """Malformed or incomplete frame."""


class UnsupportedKindError(FrameError):
    """Frame kind (or command name) not in the schema."""


class StaleFrameError(Exception):
    """Sequence number did not advance; the frame must be dropped."""


class MessageKind(enum.Enum):
    HELLO = "hello"
    CMD = "cmd"
    POSE = "pose"
    GOAL = "goal"
    TRACK = "track"
    ACK = "ack"
    ERROR = "error"


@dataclass(frozen=True)
class WireMessage:
    kind: MessageKind
    seq: int
    cmd: MotorCommand | None = None
    x: float | None = None
    y: float | None = None
    theta: float | None = None
    t: float | None = None
    points: tuple[float, ...] | None = None
    ref_seq: int | None = None
    detail: str | None = None

    @classmethod
    def hello(cls, seq: int) -> "WireMessage":
        return cls(MessageKind.HELLO, seq)

    @classmethod
    def command(cls, seq: int, cmd: MotorCommand) -> "WireMessage":
        return cls(MessageKind.CMD, seq, cmd=cmd)

    @classmethod
    def pose(cls, seq: int, x: float, y: float, theta: float, t: float) -> "WireMessage":
        return cls(MessageKind.POSE, seq, x=x, y=y, theta=theta, t=t)

    @classmethod
    def goal(cls, seq: int, x: float, y: float) -> "WireMessage":
        return cls(MessageKind.GOAL, seq, x=x, y=y)

    @classmethod
    def track(cls, seq: int, points: tuple[float, ...]) -> "WireMessage":
        return cls(MessageKind.TRACK, seq, points=points)

    @classmethod
    def ack(cls, seq: int, ref_seq: int) -> "WireMessage":
        return cls(MessageKind.ACK, seq, ref_seq=ref_seq)

    @classmethod
    def error(cls, seq: int, ref_seq: int, detail: str) -> "WireMessage":
        return cls(MessageKind.ERROR, seq, ref_seq=ref_seq, detail=detail)


def _num(value: float) -> str:
    """Render a number with at most 6 significant digits."""
    if isinstance(value, int):
        return str(value)
    if not math.isfinite(value):
        raise FrameError(f"non-finite numeric field {value!r}")
    return f"{value:.6g}"


def wire_float(value: float) -> float:
    """Quantize a float to wire precision (what a round trip preserves)."""
    return float(_num(value))


def encode(msg: WireMessage) -> bytes:
    """Encode a message as one newline-terminated JSON line."""
    parts = [f'"kind":"{msg.kind.value}"', f'"seq":{int(msg.seq)}']
    if msg.kind is MessageKind.CMD:
        if msg.cmd is None:
            raise FrameError("cmd message without a command")
        parts.append(f'"cmd":"{msg.cmd.kind.value}"')
        if msg.cmd.u_right is not None:
            parts.append(f'"u_right":{_num(msg.cmd.u_right)}')
        if msg.cmd.u_left is not None:
            parts.append(f'"u_left":{_num(msg.cmd.u_left)}')
    elif msg.kind is MessageKind.POSE:
        if None in (msg.x, msg.y, msg.theta, msg.t):
            raise FrameError("pose message requires x, y, theta, t")
        parts += [
            f'"x":{_num(msg.x)}',
            f'"y":{_num(msg.y)}',
            f'"theta":{_num(msg.theta)}',
            f'"t":{_num(msg.t)}',
        ]
    elif msg.kind is MessageKind.GOAL:
        if None in (msg.x, msg.y):
            raise FrameError("goal message requires x, y")
        parts += [f'"x":{_num(msg.x)}', f'"y":{_num(msg.y)}']
    elif msg.kind is MessageKind.TRACK:
        if not msg.points or len(msg.points) % 2 != 0:
            raise FrameError("track message requires a flat, even-length point array")
        parts.append('"points":[' + ",".join(_num(p) for p in msg.points) + "]")
    elif msg.kind in (MessageKind.ACK, MessageKind.ERROR):
        if msg.ref_seq is None:
            raise FrameError(f"{msg.kind.value} message requires ref_seq")
        parts.append(f'"ref_seq":{int(msg.ref_seq)}')
        if msg.detail is not None:
            parts.append(f'"detail":{json.dumps(msg.detail)}')
    return ("{" + ",".join(parts) + "}\n").encode()


_CMD_KINDS = {k.value: k for k in CommandKind}
_MSG_KINDS = {k.value: k for k in MessageKind}


def _require(obj: dict, key: str) -> object:
    if key not in obj:
        raise FrameError(f"missing required key {key!r}")
    return obj[key]


def _require_num(obj: dict, key: str) -> float:
    value = _require(obj, key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise FrameError(f"key {key!r} must be numeric, got {value!r}")
    if not math.isfinite(value):
        raise FrameError(f"key {key!r} is non-finite")
    return float(value)


def decode(frame: bytes | str) -> WireMessage:
    """Decode one frame line; unknown keys are ignored."""
    text = frame.decode() if isinstance(frame, bytes) else frame
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FrameError(f"not valid frame text: {text!r:.80}") from exc
    if not isinstance(obj, dict):
        raise FrameError("frame is not an object")
    kind_name = _require(obj, "kind")
    if kind_name not in _MSG_KINDS:
        raise UnsupportedKindError(f"unknown message kind {kind_name!r}")
    kind = _MSG_KINDS[kind_name]
    seq = _require(obj, "seq")
    if not isinstance(seq, int) or isinstance(seq, bool):
        raise FrameError(f"seq must be an integer, got {seq!r}")

    if kind is MessageKind.HELLO:
        return WireMessage.hello(seq)
    if kind is MessageKind.CMD:
        cmd_name = _require(obj, "cmd")
        if cmd_name not in _CMD_KINDS:
            raise UnsupportedKindError(f"unknown command {cmd_name!r}")
        u_right = _require_num(obj, "u_right") if "u_right" in obj else None
        u_left = _require_num(obj, "u_left") if "u_left" in obj else None
        cmd_kind = _CMD_KINDS[cmd_name]
        if cmd_kind is CommandKind.SPEED and (u_right is None or u_left is None):
            raise FrameError("speed command requires u_right and u_left")
        return WireMessage.command(seq, MotorCommand(cmd_kind, u_right, u_left))
    if kind is MessageKind.POSE:
        return WireMessage.pose(
            seq,
            _require_num(obj, "x"),
            _require_num(obj, "y"),
            _require_num(obj, "theta"),
            _require_num(obj, "t"),
        )
    if kind is MessageKind.GOAL:
        return WireMessage.goal(seq, _require_num(obj, "x"), _require_num(obj, "y"))
    if kind is MessageKind.TRACK:
        points = _require(obj, "points")
        if not isinstance(points, list) or len(points) % 2 != 0 or not points:
            raise FrameError("track points must be a flat, even-length array")
        values = []
        for p in points:
            if not isinstance(p, (int, float)) or isinstance(p, bool) or not math.isfinite(p):
                raise FrameError(f"bad track coordinate {p!r}")
            values.append(float(p))
        return WireMessage.track(seq, tuple(values))
    ref_seq = _require(obj, "ref_seq")
    if not isinstance(ref_seq, int) or isinstance(ref_seq, bool):
        raise FrameError(f"ref_seq must be an integer, got {ref_seq!r}")
    detail = obj.get("detail")
    if kind is MessageKind.ACK:
        return WireMessage(MessageKind.ACK, seq, ref_seq=ref_seq, detail=detail)
    return WireMessage(MessageKind.ERROR, seq, ref_seq=ref_seq, detail=detail)


def split_frames(data: bytes) -> tuple[list[bytes], bytes]:
    """Split a byte buffer into complete frames and the unconsumed tail."""
    *lines, tail = data.split(b"\n")
    return [line + b"\n" for line in lines if line], tail


class SeqTracker:
    """Per-connection monotonic sequence enforcement."""

    def __init__(self) -> None:
        self.last: int | None = None

    def accept(self, seq: int) -> bool:
        """True if the frame advances the sequence; stale frames return False."""
        if self.last is not None and seq <= self.last:
            log.debug("dropping stale frame seq=%d (last=%d)", seq, self.last)
            return False
        self.last = seq
        return True


@dataclass
class CommandGate:
    """Controller-side holder of the active command with the dead-man rule.

    If no command traffic has arrived for longer than the timeout, the
    effective command is a stop, which zeroes the wheel setpoints.
    """

    timeout: float = DEADMAN_TIMEOUT
    current: MotorCommand = field(default_factory=MotorCommand.stop)
    last_traffic: float | None = None
    seq = None

    def __post_init__(self) -> None:
        self.seq = SeqTracker()

    def offer(self, msg: WireMessage, now: float) -> bool:
        """Feed a decoded message; returns True if it became the active command."""
        if msg.kind is not MessageKind.CMD or msg.cmd is None:
            return False
        if not self.seq.accept(msg.seq):
            return False
        self.current = msg.cmd
        self.last_traffic = now
        return True

    def effective(self, now: float) -> MotorCommand:
        if self.last_traffic is None or now - self.last_traffic > self.timeout:
            return MotorCommand.stop()
        return self.current


class LoopbackLink:
    """In-process link carrying encoded frames with a fixed delivery latency.

    Frames pass through the real codec so wire quantization applies in
    simulation exactly as it would over a socket.
    """

    def __init__(self, latency: float = 0.0) -> None:
        self.latency = latency
        self._queue: list[tuple[float, bytes]] = []

    def send(self, msg: WireMessage, now: float) -> None:
        self._queue.append((now + self.latency, encode(msg)))

    def poll(self, now: float) -> list[WireMessage]:
        """Frames whose delivery time has arrived, in send order."""
        due, pending = [], []
        for deliver_at, frame in self._queue:
            (due if deliver_at <= now else pending).append((deliver_at, frame))
        self._queue = pending
        return [decode(frame) for _, frame in due]
