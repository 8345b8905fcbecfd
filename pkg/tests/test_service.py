"""Fleet service end to end: live links, console feed, static bundle.

Every test runs a real server on ephemeral ports inside asyncio.run, with
real sockets on both sides, so the framed protocol and the websocket feed
are exercised exactly as a vehicle and a browser would.
"""

import asyncio
import json

from websockets.asyncio.client import connect

from reefseed.fleetlink.protocol import (
    CommandMessage,
    CommandType,
    MissionProgress,
    TelemetryMessage,
    encode_message,
)
from reefseed.fleetlink.service import (
    FleetService,
    SimulatedVehicle,
    read_frame,
    run_fleet,
    vehicle_frames,
)
from reefseed.simulator import run_scenario
from reefseed.vehicle import Pose2D
from reefseed.world import SubstrateClass

from test_simulator import small_scenario

HOST = "127.0.0.1"


def telemetry(vehicle_id="asv-1", sequence=0, timestamp=1.0, gauge=0.75):
    return TelemetryMessage(
        vehicle_id=vehicle_id,
        sequence=sequence,
        timestamp=timestamp,
        pose=Pose2D(2.0, 3.0, 0.1),
        battery=0.9,
        gauge=gauge,
        last_decision=(2.0, 3.0, SubstrateClass.SUITABLE),
        mission_progress=MissionProgress(active_index=1, complete=False),
    )


async def started_service(**kwargs):
    service = FleetService(**kwargs)
    await service.start(HOST, 0, 0)
    return service


async def recv_json(ws, timeout=2.0):
    return json.loads(await asyncio.wait_for(ws.recv(), timeout))


async def recv_until(ws, kind, timeout=2.0):
    for _ in range(50):
        msg = await recv_json(ws, timeout)
        if msg["type"] == kind:
            return msg
    raise AssertionError("no %r message arrived" % kind)


def test_telemetry_fans_out_to_console():
    async def scenario():
        service = await started_service()
        try:
            async with connect("ws://%s:%d" % (HOST, service.console_port)) as ws:
                snapshot = await recv_json(ws)
                assert snapshot == {"type": "roster", "vehicles": []}

                _, writer = await asyncio.open_connection(HOST, service.vehicle_port)
                writer.write(encode_message(telemetry()))
                await writer.drain()

                roster = await recv_until(ws, "roster")
                assert roster["vehicles"][0]["vehicle_id"] == "asv-1"
                frame = await recv_until(ws, "telemetry")
                assert frame["vehicle_id"] == "asv-1"
                assert frame["sequence"] == 0
                assert frame["gauge"] == 0.75
                assert frame["pose"] == {"x": 2.0, "y": 3.0, "heading": 0.1}
                assert frame["last_decision"]["predicted"] == "suitable"
                writer.close()
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_out_of_order_telemetry_is_dropped():
    async def scenario():
        service = await started_service()
        try:
            async with connect("ws://%s:%d" % (HOST, service.console_port)) as ws:
                await recv_json(ws)  # roster snapshot
                _, writer = await asyncio.open_connection(HOST, service.vehicle_port)
                for seq in (5, 3, 6):
                    writer.write(encode_message(telemetry(sequence=seq)))
                await writer.drain()

                seen = []
                while len(seen) < 2:
                    msg = await recv_json(ws)
                    if msg["type"] == "telemetry":
                        seen.append(msg["sequence"])
                assert seen == [5, 6]
                assert service.registry.sessions["asv-1"].last_sequence == 6
                writer.close()
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_console_command_reaches_the_vehicle():
    async def scenario():
        service = await started_service()
        try:
            reader, writer = await asyncio.open_connection(HOST, service.vehicle_port)
            writer.write(encode_message(telemetry()))
            await writer.drain()
            async with connect("ws://%s:%d" % (HOST, service.console_port)) as ws:
                await recv_json(ws)
                await ws.send(json.dumps(
                    {"action": "command", "vehicle_id": "asv-1", "command": "stop"}
                ))
                ack = await recv_until(ws, "ack")
                assert ack == {"type": "ack", "vehicle_id": "asv-1", "command": "stop"}

                msg = await asyncio.wait_for(read_frame(reader), 2.0)
                assert isinstance(msg, CommandMessage)
                assert msg.command is CommandType.STOP
            writer.close()
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_upload_to_stale_vehicle_is_rejected_but_stop_allowed():
    async def scenario():
        now = [0.0]
        service = await started_service(stale_timeout=10.0, clock=lambda: now[0])
        try:
            reader, writer = await asyncio.open_connection(HOST, service.vehicle_port)
            writer.write(encode_message(telemetry()))
            await writer.drain()
            await asyncio.sleep(0.05)
            now[0] = 100.0
            assert service.sweep_once() == ["asv-1"]

            async with connect("ws://%s:%d" % (HOST, service.console_port)) as ws:
                await recv_json(ws)
                await ws.send(json.dumps({
                    "action": "command", "vehicle_id": "asv-1",
                    "command": "upload_mission",
                    "mission": {"waypoints": [[0.0, 0.0], [5.0, 0.0]]},
                }))
                reply = await recv_until(ws, "error")
                assert "stale" in reply["message"]

                await ws.send(json.dumps(
                    {"action": "command", "vehicle_id": "asv-1", "command": "stop"}
                ))
                ack = await recv_until(ws, "ack")
                assert ack["command"] == "stop"
                msg = await asyncio.wait_for(read_frame(reader), 2.0)
                assert msg.command is CommandType.STOP
            writer.close()
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_command_for_unknown_vehicle_is_an_error():
    async def scenario():
        service = await started_service()
        try:
            async with connect("ws://%s:%d" % (HOST, service.console_port)) as ws:
                await recv_json(ws)
                await ws.send(json.dumps(
                    {"action": "command", "vehicle_id": "ghost", "command": "stop"}
                ))
                reply = await recv_until(ws, "error")
                assert "ghost" in reply["message"]
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_bad_console_messages_get_error_replies():
    async def scenario():
        service = await started_service()
        try:
            async with connect("ws://%s:%d" % (HOST, service.console_port)) as ws:
                await recv_json(ws)
                await ws.send("not json at all")
                assert (await recv_until(ws, "error"))["message"].startswith("bad console")
                await ws.send(json.dumps({"action": "self_destruct"}))
                reply = await recv_until(ws, "error")
                assert "self_destruct" in reply["message"]
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_eighth_vehicle_link_is_dropped():
    async def scenario():
        service = await started_service()
        try:
            links = []
            for i in range(7):
                reader, writer = await asyncio.open_connection(HOST, service.vehicle_port)
                writer.write(encode_message(telemetry(vehicle_id="asv-%d" % i)))
                await writer.drain()
                links.append((reader, writer))
            reader8, writer8 = await asyncio.open_connection(HOST, service.vehicle_port)
            writer8.write(encode_message(telemetry(vehicle_id="asv-late")))
            await writer8.drain()
            assert await asyncio.wait_for(reader8.read(), 2.0) == b""
            assert len(service.registry.sessions) == 7
            assert "asv-late" not in service.registry.sessions
            for _, writer in links:
                writer.close()
            writer8.close()
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_garbage_on_the_vehicle_port_closes_the_link():
    async def scenario():
        service = await started_service()
        try:
            reader, writer = await asyncio.open_connection(HOST, service.vehicle_port)
            writer.write(b"\xff" * 64)
            await writer.drain()
            assert await asyncio.wait_for(reader.read(), 2.0) == b""
            assert service.registry.sessions == {}
            writer.close()
        finally:
            await service.stop()

    asyncio.run(scenario())


async def http_get(port, path):
    reader, writer = await asyncio.open_connection(HOST, port)
    writer.write(
        ("GET %s HTTP/1.1\r\nHost: %s\r\nConnection: close\r\n\r\n" % (path, HOST)).encode()
    )
    await writer.drain()
    raw = await asyncio.wait_for(reader.read(), 2.0)
    writer.close()
    head, _, body = raw.partition(b"\r\n\r\n")
    return head.decode("latin-1"), body


def test_static_bundle_is_served(tmp_path):
    (tmp_path / "index.html").write_text("<html><body>console</body></html>")
    (tmp_path / "app.js").write_text("export {};")

    async def scenario():
        service = await started_service(static_root=str(tmp_path))
        try:
            head, body = await http_get(service.console_port, "/")
            assert "200" in head.splitlines()[0]
            assert "text/html" in head
            assert b"console" in body

            head, _ = await http_get(service.console_port, "/app.js")
            assert "200" in head.splitlines()[0]

            head, _ = await http_get(service.console_port, "/missing.js")
            assert "404" in head.splitlines()[0]

            head, _ = await http_get(service.console_port, "/../secret")
            assert "404" in head.splitlines()[0]
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_no_bundle_configured_is_a_404():
    async def scenario():
        service = await started_service()
        try:
            head, _ = await http_get(service.console_port, "/")
            assert "404" in head.splitlines()[0]
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_vehicle_frames_match_the_trajectory():
    result = run_scenario(small_scenario())
    frames = vehicle_frames(result, "asv-2")
    assert len(frames) == len(result.trajectory)
    assert [f.sequence for f in frames] == list(range(len(frames)))
    assert frames[-1].mission_progress.complete
    assert not frames[0].mission_progress.complete
    for frame, point in zip(frames, result.trajectory):
        assert frame.pose.x == point.x
        assert frame.gauge == point.gauge
        if point.predicted is None:
            assert frame.last_decision is None


def test_simulated_vehicle_honors_stop():
    async def scenario():
        service = await started_service()
        try:
            result = run_scenario(small_scenario())
            vehicle = SimulatedVehicle(
                vehicle_id="asv-1",
                frames=vehicle_frames(result, "asv-1"),
                pace=20.0,
                tick_rate=2.0,
            )
            task = asyncio.create_task(vehicle.run(HOST, service.vehicle_port))
            while "asv-1" not in service.registry.sessions:
                await asyncio.sleep(0.01)
            await service.send_command(
                CommandMessage(vehicle_id="asv-1", command=CommandType.STOP)
            )
            sent = await asyncio.wait_for(task, 5.0)
            assert 0 < sent < len(vehicle.frames)
        finally:
            await service.stop()

    asyncio.run(scenario())


def test_run_fleet_streams_every_vehicle():
    counts = asyncio.run(
        run_fleet(
            small_scenario(),
            vehicle_count=3,
            vehicle_port=0,
            console_port=0,
            pace=5000.0,
        )
    )
    assert len(counts) == 3
    assert all(count > 0 for count in counts)
