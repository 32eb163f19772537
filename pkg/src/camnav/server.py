"""Live socket endpoints: the robot controller and the positioning server.

The controller process owns the simulated rover: it accepts one TCP command
connection, acks every command, runs the PID loop against the plant, and
streams the true pose back over the same connection (standing in for the
photons an overhead camera would see). The positioning process connects to
it, renders synthetic frames from that feed, runs the vision pipeline and
the navigation logic, sends commands back, and bridges pose/goal/track
traffic to browser clients over a websocket endpoint.

`time_scale` > 1 runs the simulated clock faster than wall time; message
timestamps and the dead-man rule always use the simulated clock.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed

from .controller import CommandKind, MotorCommand, PidState, controller_tick
from .geometry import Pose2D, WorldPoint
from .harness import SimConfig
from .navigation import NavPhase, Track, steer_step, tracker_step
from .netlink import (
    CONTROLLER_PORT,
    UI_BRIDGE_PATH,
    UI_BRIDGE_PORT,
    CommandGate,
    FrameError,
    MessageKind,
    SeqTracker,
    WireMessage,
    decode,
    encode,
)
from .plant import PlantState, read_encoders, step_plant
from .vision import MarkerNotDetectedError, estimate_pose, render_markers

log = logging.getLogger(__name__)


class ControllerServer:
    """Robot-side endpoint: plant + PID firmware behind a TCP socket."""

    def __init__(
        self,
        config: SimConfig | None = None,
        host: str = "127.0.0.1",
        port: int = CONTROLLER_PORT,
        time_scale: float = 1.0,
        start_pose: Pose2D = Pose2D(0.0, 0.0, 0.0),
    ) -> None:
        self.config = config or SimConfig()
        self.host = host
        self.port = port
        self.time_scale = time_scale
        self.plant = PlantState(pose=start_pose)
        self.gate = CommandGate()
        self.sim_time = 0.0
        self._pid_states = (PidState(), PidState())
        self._plant_at_last_pid = self.plant
        self._pwm = (0.0, 0.0)
        self._client: asyncio.StreamWriter | None = None
        self._seq_out = 0
        self._server: asyncio.Server | None = None
        self._loop_task: asyncio.Task | None = None

    @property
    def bound_port(self) -> int:
        assert self._server is not None
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._handle_client, self.host, self.port)
        self._loop_task = asyncio.create_task(self._control_loop())

    async def stop(self) -> None:
        if self._loop_task:
            self._loop_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await self._loop_task
        if self._server:
            self._server.close()
            await self._server.wait_closed()

    def _next_seq(self) -> int:
        self._seq_out += 1
        return self._seq_out

    def _send(self, writer: asyncio.StreamWriter, msg: WireMessage) -> None:
        try:
            writer.write(encode(msg))
        except ConnectionError:
            pass

    async def _handle_client(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        if self._client is not None:
            log.warning("rejecting second command connection")
            self._send(writer, WireMessage.error(self._next_seq(), 0, "busy"))
            writer.close()
            return
        self._client = writer
        self._send(writer, WireMessage.hello(self._next_seq()))
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                try:
                    msg = decode(line)
                except FrameError as exc:
                    self._send(writer, WireMessage.error(self._next_seq(), 0, str(exc)))
                    continue
                if msg.kind is MessageKind.CMD:
                    if self.gate.offer(msg, self.sim_time):
                        self._send(writer, WireMessage.ack(self._next_seq(), msg.seq))
                    # stale frames are dropped without an ack
        except ConnectionError:
            pass
        finally:
            self._client = None
            with contextlib.suppress(Exception):
                writer.close()

    async def _control_loop(self) -> None:
        """Advance the plant in PID-period chunks, pacing by the wall clock."""
        cfg = self.config
        n_phys = round(cfg.pid_period / cfg.physics_dt)
        cam_every = max(1, round(cfg.camera_period / cfg.pid_period))
        tick = 0
        while True:
            await asyncio.sleep(cfg.pid_period / self.time_scale)
            measured = read_encoders(
                self.plant, self._plant_at_last_pid, cfg.robot, cfg.pid_period
            )
            self._plant_at_last_pid = self.plant
            pwm_r, pwm_l, self._pid_states = controller_tick(
                cfg.pid,
                self._pid_states,
                self.gate.effective(self.sim_time),
                measured[0],
                measured[1],
                max_speed=cfg.robot.max_wheel_speed,
            )
            self._pwm = (pwm_r, pwm_l)
            for _ in range(n_phys):
                self.plant = step_plant(
                    self.plant, cfg.robot, self._pwm[0], self._pwm[1], cfg.physics_dt
                )
                self.sim_time += cfg.physics_dt
            tick += 1
            if self._client is not None and tick % cam_every == 0:
                pose = self.plant.pose
                self._send(
                    self._client,
                    WireMessage.pose(self._next_seq(), pose.x, pose.y, pose.theta, self.sim_time),
                )

    def wheel_speeds(self) -> tuple[float, float]:
        return self.plant.omega_right, self.plant.omega_left

    def current_setpoints(self) -> tuple[float, float]:
        from .controller import command_to_setpoints

        return command_to_setpoints(
            self.gate.effective(self.sim_time), self.config.robot.max_wheel_speed
        )


@dataclass
class _NavState:
    mode: str = "idle"  # idle | goal | track
    goal: WorldPoint | None = None
    track: Track | None = None
    phase: NavPhase = NavPhase.ALIGNING


class PositioningServer:
    """Laptop-side endpoint: vision + navigation + websocket UI bridge."""

    def __init__(
        self,
        config: SimConfig | None = None,
        controller_host: str = "127.0.0.1",
        controller_port: int = CONTROLLER_PORT,
        ui_host: str = "127.0.0.1",
        ui_port: int = UI_BRIDGE_PORT,
    ) -> None:
        self.config = config or SimConfig()
        self.controller_host = controller_host
        self.controller_port = controller_port
        self.ui_host = ui_host
        self.ui_port = ui_port
        self.nav = _NavState()
        self.last_estimate: Pose2D | None = None
        self._rng = np.random.default_rng(self.config.rng_seed)
        self._seq_out = 0
        self._ui_clients: set = set()
        self._in_flight: set = set()
        self._ui_server = None
        self._reader_task: asyncio.Task | None = None
        self._writer: asyncio.StreamWriter | None = None
        self._controller_seq = SeqTracker()

    @property
    def bound_ui_port(self) -> int:
        assert self._ui_server is not None
        return next(iter(self._ui_server.sockets)).getsockname()[1]

    def _next_seq(self) -> int:
        self._seq_out += 1
        return self._seq_out

    async def start(self) -> None:
        reader, writer = await asyncio.open_connection(
            self.controller_host, self.controller_port
        )
        self._writer = writer
        self._ui_server = await ws_serve(
            self._ui_handler, self.ui_host, self.ui_port
        )
        self._reader_task = asyncio.create_task(self._consume_scene(reader))

    async def stop(self) -> None:
        if self._reader_task:
            self._reader_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await self._reader_task
        if self._writer:
            self._writer.close()
        if self._ui_server:
            self._ui_server.close()
            await self._ui_server.wait_closed()

    async def _consume_scene(self, reader: asyncio.StreamReader) -> None:
        """Drive one navigation step per scene-feed pose from the controller."""
        while True:
            line = await reader.readline()
            if not line:
                log.warning("controller link closed")
                break
            try:
                msg = decode(line)
            except FrameError:
                continue
            if msg.kind is not MessageKind.POSE:
                continue
            if not self._controller_seq.accept(msg.seq):
                continue
            self._camera_tick(Pose2D(msg.x, msg.y, msg.theta), msg.t)

    def _camera_tick(self, true_pose: Pose2D, t: float) -> None:
        cfg = self.config
        frame = render_markers(
            cfg.camera, true_pose, cfg.layout, cfg.pixel_noise_std, self._rng
        )
        try:
            estimate = estimate_pose(cfg.camera, frame)
        except MarkerNotDetectedError:
            return  # no command this tick; the dead-man rule covers us
        self.last_estimate = estimate

        cmd = MotorCommand.stop()
        if self.nav.mode == "goal" and self.nav.goal is not None:
            cmd, self.nav.phase = steer_step(
                estimate, self.nav.goal, self.nav.phase, cfg.steer
            )
        elif self.nav.mode == "track" and self.nav.track is not None:
            cmd = tracker_step(estimate, self.nav.track, cfg.tracker)
            if cmd.kind is CommandKind.STOP:
                self.nav.mode = "idle"
                self.nav.track = None
        self._send_command(cmd)
        self._broadcast(
            WireMessage.pose(self._next_seq(), estimate.x, estimate.y, estimate.theta, t)
        )

    def _send_command(self, cmd: MotorCommand) -> None:
        if self._writer is None:
            return
        try:
            self._writer.write(encode(WireMessage.command(self._next_seq(), cmd)))
        except ConnectionError:
            pass

    def _broadcast(self, msg: WireMessage) -> None:
        """Fan a message out to every UI client without awaiting any of them.

        A client whose previous send is still in flight just misses this
        frame; slow consumers never stall the pose producer.
        """
        payload = encode(msg).decode().rstrip("\n")
        for client in tuple(self._ui_clients):
            if client in self._in_flight:
                continue
            task = asyncio.ensure_future(client.send(payload))
            self._in_flight.add(client)
            task.add_done_callback(lambda t, c=client: self._reap(t, c))

    def _reap(self, task: asyncio.Task, client) -> None:
        self._in_flight.discard(client)
        if task.cancelled() or task.exception() is not None:
            self._ui_clients.discard(client)

    async def _ui_handler(self, connection) -> None:
        if connection.request.path not in (UI_BRIDGE_PATH, "/"):
            await connection.close(code=1008, reason="unknown path")
            return
        self._ui_clients.add(connection)
        cfg = self.config
        hello = encode(WireMessage.hello(self._next_seq())).decode().rstrip("\n")
        # extension keys (ignored by strict decoders): arena geometry so a
        # fresh UI can set up its world mapping
        extras = (
            f',"arena_width":{cfg.arena_width:.6g}'
            f',"arena_height":{cfg.arena_height:.6g}'
            f',"camera_scale":{cfg.camera.scale:.6g}'
            f',"image_width":{cfg.camera.image_width}'
            f',"image_height":{cfg.camera.image_height}'
        )
        await connection.send(hello[:-1] + extras + "}")
        try:
            async for raw in connection:
                await self._on_ui_message(connection, raw)
        except ConnectionClosed:
            pass
        finally:
            self._ui_clients.discard(connection)

    async def _on_ui_message(self, connection, raw: str | bytes) -> None:
        try:
            msg = decode(raw if isinstance(raw, str) else raw.decode())
        except FrameError as exc:
            await self._reply(connection, WireMessage.error(self._next_seq(), 0, str(exc)))
            return
        if msg.kind is MessageKind.GOAL:
            if not self.config.in_arena(msg.x, msg.y):
                await self._reply(
                    connection,
                    WireMessage.error(self._next_seq(), msg.seq, "goal outside arena"),
                )
                return
            self.nav.mode = "goal"
            self.nav.goal = WorldPoint(msg.x, msg.y)
            self.nav.phase = NavPhase.ALIGNING
            await self._reply(connection, WireMessage.ack(self._next_seq(), msg.seq))
            self._broadcast(WireMessage.goal(self._next_seq(), msg.x, msg.y))
        elif msg.kind is MessageKind.TRACK:
            try:
                points = tuple(
                    WorldPoint(msg.points[i], msg.points[i + 1])
                    for i in range(0, len(msg.points), 2)
                )
                track = Track(points=points)
                for p in points:
                    if not self.config.in_arena(p.x, p.y):
                        raise ValueError(f"track point {p} outside arena")
            except Exception as exc:
                await self._reply(
                    connection, WireMessage.error(self._next_seq(), msg.seq, str(exc))
                )
                return
            self.nav.mode = "track"
            self.nav.track = track
            await self._reply(connection, WireMessage.ack(self._next_seq(), msg.seq))
            self._broadcast(WireMessage.track(self._next_seq(), msg.points))
        elif msg.kind is MessageKind.HELLO:
            await self._reply(connection, WireMessage.ack(self._next_seq(), msg.seq))
        elif msg.kind is MessageKind.CMD:
            # the UI never drives motors directly
            await self._reply(
                connection,
                WireMessage.error(self._next_seq(), msg.seq, "cmd not accepted from UI"),
            )

    async def _reply(self, connection, msg: WireMessage) -> None:
        with contextlib.suppress(ConnectionClosed):
            await connection.send(encode(msg).decode().rstrip("\n"))


@dataclass
class LiveStack:
    """Controller + positioning in one process, wired over localhost."""

    controller: ControllerServer
    positioning: PositioningServer

    @classmethod
    async def launch(
        cls,
        config: SimConfig | None = None,
        ui_port: int = UI_BRIDGE_PORT,
        time_scale: float = 1.0,
        start_pose: Pose2D = Pose2D(0.0, 0.0, 0.0),
    ) -> "LiveStack":
        config = config or SimConfig()
        controller = ControllerServer(
            config, port=0, time_scale=time_scale, start_pose=start_pose
        )
        await controller.start()
        positioning = PositioningServer(
            config,
            controller_port=controller.bound_port,
            ui_port=ui_port,
        )
        await positioning.start()
        return cls(controller=controller, positioning=positioning)

    async def stop(self) -> None:
        await self.positioning.stop()
        await self.controller.stop()
