"""Fleet service: vehicle links, console feed, and the operator bundle.

Vehicles speak the framed codec over TCP (default port 7077). The console
connects by websocket on a second port, receives every accepted telemetry
frame plus roster updates as JSON, and submits commands as JSON; the same
port serves the static console bundle to plain HTTP requests.

All session state lives on one event loop, so no locks: the network
boundary, the registry, and the fan-out queues are touched from exactly
one task at a time. Console subscribers each get a bounded queue and
drop frames when full; a slow browser never backpressures a vehicle.
Protocol violations on a vehicle link close that link, nothing else.
"""

from __future__ import annotations

import asyncio
import json
import mimetypes
import time
from dataclasses import dataclass, replace
from http import HTTPStatus
from pathlib import Path

from websockets.asyncio.server import serve as ws_serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Response

from ..errors import DecodeError, DispatchError, FleetCapacityError, ReefSeedError
from ..vehicle import Pose2D
from .protocol import (
    FRAME_HEADER,
    MAX_PAYLOAD_BYTES,
    CommandMessage,
    CommandType,
    MissionProgress,
    TelemetryMessage,
    _decode_command,
    _telemetry_payload,
    decode_message,
    encode_message,
)
from .registry import (
    DEFAULT_STALE_TIMEOUT,
    FleetRegistry,
    accept_command,
    record_telemetry,
    register_vehicle,
    staleness_sweep,
)

DEFAULT_VEHICLE_PORT = 7077
DEFAULT_CONSOLE_PORT = 7078
_SUBSCRIBER_QUEUE_FRAMES = 256


async def read_frame(reader: asyncio.StreamReader) -> TelemetryMessage | CommandMessage:
    """One framed message off a stream; raises DecodeError on violations
    and IncompleteReadError on a clean close."""
    header = await reader.readexactly(FRAME_HEADER.size)
    length, _ = FRAME_HEADER.unpack(header)
    if length > MAX_PAYLOAD_BYTES:
        raise DecodeError("declared payload of %d bytes exceeds frame limit" % length)
    body = await reader.readexactly(length)
    return decode_message(header + body)


def _console_command(obj: dict) -> CommandMessage:
    """A CommandMessage from the console's JSON, with mission defaults
    filled so the browser can send bare waypoint lists."""
    mission = obj.get("mission")
    if isinstance(mission, dict):
        mission = {
            "waypoints": mission.get("waypoints"),
            "arrival_radius": mission.get("arrival_radius", 1.0),
            "mode": mission.get("mode", "transect"),
        }
    payload = {
        "vehicle_id": obj.get("vehicle_id"),
        "command": obj.get("command"),
        "mission": mission,
        "payload": obj.get("payload"),
        "dispersal_mode": obj.get("dispersal_mode"),
    }
    return _decode_command(payload)


class FleetService:
    def __init__(
        self,
        stale_timeout: float = DEFAULT_STALE_TIMEOUT,
        static_root: str | None = None,
        clock=time.monotonic,
    ):
        self.registry = FleetRegistry()
        self.stale_timeout = stale_timeout
        self.static_root = None if static_root is None else Path(static_root).resolve()
        self.clock = clock
        self._writers: dict[str, asyncio.StreamWriter] = {}
        self._subscribers: set[asyncio.Queue] = set()
        self._vehicle_server: asyncio.Server | None = None
        self._console_server = None
        self._sweeper: asyncio.Task | None = None

    # -- fan-out ----------------------------------------------------------

    def _broadcast(self, obj: dict) -> None:
        text = json.dumps(obj, separators=(",", ":"))
        for queue in list(self._subscribers):
            try:
                queue.put_nowait(text)
            except asyncio.QueueFull:
                pass  # slow console drops frames, vehicles never wait

    def roster(self) -> dict:
        vehicles = [
            {
                "vehicle_id": s.vehicle_id,
                "stale": s.stale,
                "last_seen": s.last_seen,
                "last_sequence": s.last_sequence,
            }
            for _, s in sorted(self.registry.sessions.items())
        ]
        return {"type": "roster", "vehicles": vehicles}

    # -- vehicle side -----------------------------------------------------

    async def handle_vehicle(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        vehicle_id = None
        try:
            while True:
                msg = await read_frame(reader)
                if not isinstance(msg, TelemetryMessage):
                    continue  # vehicles only ever send telemetry
                now = self.clock()
                if vehicle_id is None:
                    register_vehicle(self.registry, msg.vehicle_id, now=now)
                    vehicle_id = msg.vehicle_id
                    self._writers[vehicle_id] = writer
                    self._broadcast(self.roster())
                if record_telemetry(self.registry, msg, now):
                    self._broadcast({"type": "telemetry"} | _telemetry_payload(msg))
        except (asyncio.IncompleteReadError, ConnectionResetError):
            pass
        except (DecodeError, FleetCapacityError):
            pass  # violation or full fleet: drop the link
        finally:
            if vehicle_id is not None and self._writers.get(vehicle_id) is writer:
                del self._writers[vehicle_id]
            writer.close()

    async def send_command(self, msg: CommandMessage) -> None:
        """Gate a command through the registry and put it on the wire."""
        accept_command(self.registry, msg)
        writer = self._writers.get(msg.vehicle_id)
        if writer is None:
            raise DispatchError("vehicle %r has no live link" % msg.vehicle_id)
        writer.write(encode_message(msg))
        await writer.drain()

    # -- console side -----------------------------------------------------

    async def _handle_console(self, websocket) -> None:
        queue: asyncio.Queue = asyncio.Queue(maxsize=_SUBSCRIBER_QUEUE_FRAMES)
        self._subscribers.add(queue)
        queue.put_nowait(json.dumps(self.roster(), separators=(",", ":")))

        async def pump():
            try:
                while True:
                    await websocket.send(await queue.get())
            except ConnectionClosed:
                pass

        sender = asyncio.create_task(pump())
        try:
            async for raw in websocket:
                reply = self._console_request(raw)
                try:
                    queue.put_nowait(json.dumps(reply, separators=(",", ":")))
                except asyncio.QueueFull:
                    pass
        except ConnectionClosed:
            pass
        finally:
            self._subscribers.discard(queue)
            sender.cancel()

    def _console_request(self, raw) -> dict:
        try:
            obj = json.loads(raw)
            if not isinstance(obj, dict):
                raise DecodeError("console messages are JSON objects")
            action = obj.get("action")
            if action == "roster":
                return self.roster()
            if action == "command":
                msg = _console_command(obj)
                accept_command(self.registry, msg)
                asyncio.ensure_future(self._forward(msg))
                return {
                    "type": "ack",
                    "vehicle_id": msg.vehicle_id,
                    "command": msg.command.value,
                }
            raise DecodeError("unknown console action %r" % action)
        except ReefSeedError as exc:
            return {"type": "error", "message": str(exc)}
        except (json.JSONDecodeError, AttributeError, TypeError) as exc:
            return {"type": "error", "message": "bad console message: %s" % exc}

    async def _forward(self, msg: CommandMessage) -> None:
        try:
            await self.send_command(msg)
        except (ReefSeedError, ConnectionError) as exc:
            self._broadcast(
                {"type": "error", "vehicle_id": msg.vehicle_id, "message": str(exc)}
            )

    # -- static bundle ----------------------------------------------------

    def _process_request(self, connection, request):
        if "Upgrade" in request.headers:
            return None  # proceed with the websocket handshake
        return self._static_response(connection, request.path)

    def _static_response(self, connection, path: str):
        if self.static_root is None:
            return connection.respond(
                HTTPStatus.NOT_FOUND, "no console bundle configured\n"
            )
        name = path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (self.static_root / name).resolve()
        if not target.is_relative_to(self.static_root) or not target.is_file():
            return connection.respond(HTTPStatus.NOT_FOUND, "not found\n")
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        body = target.read_bytes()
        return Response(
            HTTPStatus.OK,
            "OK",
            Headers(
                [("Content-Type", content_type), ("Content-Length", str(len(body)))]
            ),
            body,
        )

    # -- lifecycle --------------------------------------------------------

    async def _sweep_loop(self) -> None:
        while True:
            await asyncio.sleep(self.stale_timeout / 4.0)
            self.sweep_once()

    def sweep_once(self) -> list[str]:
        before = {vid for vid, s in self.registry.sessions.items() if s.stale}
        stale = staleness_sweep(self.registry, self.clock(), self.stale_timeout)
        if set(stale) != before:
            self._broadcast(self.roster())
        return stale

    async def start(
        self,
        host: str = "127.0.0.1",
        vehicle_port: int = DEFAULT_VEHICLE_PORT,
        console_port: int = DEFAULT_CONSOLE_PORT,
    ) -> None:
        self._vehicle_server = await asyncio.start_server(
            self.handle_vehicle, host, vehicle_port
        )
        self._console_server = await ws_serve(
            self._handle_console, host, console_port,
            process_request=self._process_request,
        )
        self._sweeper = asyncio.create_task(self._sweep_loop())

    @property
    def vehicle_port(self) -> int:
        return self._vehicle_server.sockets[0].getsockname()[1]

    @property
    def console_port(self) -> int:
        return self._console_server.sockets[0].getsockname()[1]

    async def stop(self) -> None:
        if self._sweeper is not None:
            self._sweeper.cancel()
        if self._vehicle_server is not None:
            self._vehicle_server.close()
            await self._vehicle_server.wait_closed()
        if self._console_server is not None:
            self._console_server.close()
            await self._console_server.wait_closed()


@dataclass
class SimulatedVehicle:
    """Replays a finished scenario run over a live vehicle link.

    Telemetry is streamed at the scenario tick rate divided by ``pace``;
    a STOP command from the service ends the stream early, matching the
    always-accepted safety stop.
    """

    vehicle_id: str
    frames: list[TelemetryMessage]
    pace: float = 10.0
    tick_rate: float = 2.0

    async def run(self, host: str, port: int) -> int:
        reader, writer = await asyncio.open_connection(host, port)
        stop = asyncio.Event()

        async def listen():
            try:
                while True:
                    msg = await read_frame(reader)
                    if isinstance(msg, CommandMessage) and msg.command is CommandType.STOP:
                        stop.set()
                        return
            except (asyncio.IncompleteReadError, ConnectionResetError, DecodeError):
                stop.set()

        listener = asyncio.create_task(listen())
        sent = 0
        delay = 1.0 / (self.tick_rate * self.pace)
        try:
            for frame in self.frames:
                if stop.is_set():
                    break
                writer.write(encode_message(frame))
                await writer.drain()
                sent += 1
                await asyncio.sleep(delay)
        except ConnectionResetError:
            pass
        finally:
            listener.cancel()
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionResetError, BrokenPipeError):
                pass
        return sent


def vehicle_frames(result, vehicle_id: str) -> list[TelemetryMessage]:
    """Wire messages for a finished run, one per trajectory point."""
    frames = []
    last = len(result.trajectory) - 1
    for seq, p in enumerate(result.trajectory):
        decision = None
        if p.predicted is not None:
            decision = (p.x, p.y, p.predicted)
        frames.append(
            TelemetryMessage(
                vehicle_id=vehicle_id,
                sequence=seq,
                timestamp=p.t,
                pose=Pose2D(p.x, p.y, p.heading),
                battery=p.battery,
                gauge=p.gauge,
                last_decision=decision,
                mission_progress=MissionProgress(
                    active_index=p.active_index,
                    complete=result.end_reason == "mission_complete" and seq == last,
                ),
            )
        )
    return frames


async def run_fleet(
    scenario,
    vehicle_count: int,
    host: str = "127.0.0.1",
    vehicle_port: int = DEFAULT_VEHICLE_PORT,
    console_port: int = DEFAULT_CONSOLE_PORT,
    static_root: str | None = None,
    pace: float = 10.0,
    linger: float = 0.0,
) -> list[int]:
    """Serve a fleet of simulated vehicles until they finish streaming.

    Each vehicle replays the scenario under its own seed so the console
    shows ``vehicle_count`` distinct missions. Returns frames sent per
    vehicle.
    """
    from ..simulator import run_scenario

    service = FleetService(static_root=static_root)
    await service.start(host, vehicle_port, console_port)
    try:
        vehicles = []
        for i in range(vehicle_count):
            result = run_scenario(replace(scenario, seed=scenario.seed + i))
            vehicles.append(
                SimulatedVehicle(
                    vehicle_id="asv-%d" % (i + 1),
                    frames=vehicle_frames(result, "asv-%d" % (i + 1)),
                    pace=pace,
                    tick_rate=scenario.tick_rate,
                )
            )
        counts = await asyncio.gather(
            *(v.run(host, service.vehicle_port) for v in vehicles)
        )
        if linger > 0:
            await asyncio.sleep(linger)
        return list(counts)
    finally:
        await service.stop()
