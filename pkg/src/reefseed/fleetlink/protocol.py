"""Wire codec for vehicle telemetry and fleet commands.

Frame layout: 4-byte big-endian payload length, 1-byte message type tag,
then the payload as canonical JSON (fixed key order, no whitespace,
shortest round-trip floats). The same message therefore always encodes to
the same bytes, and decode(encode(m)) == m. Decoding never throws
anything but DecodeError, whatever bytes arrive.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum

from ..dispersal import DispersalMode
from ..errors import DecodeError, EncodingError, InvalidParameterError
from ..guidance import Mission, MissionMode
from ..vehicle import PayloadConfig, PayloadKind, Pose2D
from ..world import SubstrateClass

FRAME_HEADER = struct.Struct(">IB")
TELEMETRY_TAG = 1
COMMAND_TAG = 2
MAX_PAYLOAD_BYTES = 64 * 1024


class CommandType(Enum):
    UPLOAD_MISSION = "upload_mission"
    SET_PAYLOAD = "set_payload"
    SET_DISPERSAL_MODE = "set_dispersal_mode"
    START = "start"
    STOP = "stop"
    RETURN_HOME = "return_home"


@dataclass(frozen=True, slots=True)
class MissionProgress:
    active_index: int
    complete: bool


@dataclass(frozen=True, slots=True)
class TelemetryMessage:
    vehicle_id: str
    sequence: int
    timestamp: float
    pose: Pose2D
    battery: float
    gauge: float
    last_decision: tuple[float, float, SubstrateClass] | None
    mission_progress: MissionProgress

    def __post_init__(self) -> None:
        if not self.vehicle_id:
            raise InvalidParameterError("vehicle_id must be nonempty")
        if self.sequence < 0:
            raise InvalidParameterError("sequence must be >= 0")
        if not 0.0 <= self.battery <= 1.0 or not 0.0 <= self.gauge <= 1.0:
            raise InvalidParameterError("battery and gauge are fractions in [0, 1]")


@dataclass(frozen=True, slots=True)
class CommandMessage:
    vehicle_id: str
    command: CommandType
    mission: Mission | None = None
    payload: PayloadConfig | None = None
    dispersal_mode: DispersalMode | None = None

    def __post_init__(self) -> None:
        if not self.vehicle_id:
            raise InvalidParameterError("vehicle_id must be nonempty")
        if self.command is CommandType.UPLOAD_MISSION and self.mission is None:
            raise InvalidParameterError("upload_mission carries a mission")
        if self.command is CommandType.SET_PAYLOAD and self.payload is None:
            raise InvalidParameterError("set_payload carries a payload config")
        if self.command is CommandType.SET_DISPERSAL_MODE and self.dispersal_mode is None:
            raise InvalidParameterError("set_dispersal_mode carries a mode")


def _telemetry_payload(msg: TelemetryMessage) -> dict:
    decision = None
    if msg.last_decision is not None:
        x, y, predicted = msg.last_decision
        decision = {"x": x, "y": y, "predicted": predicted.value}
    return {
        "vehicle_id": msg.vehicle_id,
        "sequence": msg.sequence,
        "timestamp": msg.timestamp,
        "pose": {"x": msg.pose.x, "y": msg.pose.y, "heading": msg.pose.heading},
        "battery": msg.battery,
        "gauge": msg.gauge,
        "last_decision": decision,
        "mission_progress": {
            "active_index": msg.mission_progress.active_index,
            "complete": msg.mission_progress.complete,
        },
    }


def _command_payload(msg: CommandMessage) -> dict:
    mission = None
    if msg.mission is not None:
        mission = {
            "waypoints": [[x, y] for x, y in msg.mission.waypoints],
            "arrival_radius": msg.mission.arrival_radius,
            "mode": msg.mission.mode.value,
        }
    payload = None
    if msg.payload is not None:
        payload = {
            "kind": msg.payload.kind.value,
            "bladder_capacity": msg.payload.bladder_capacity,
            "camera_footprint": msg.payload.camera_footprint,
        }
    return {
        "vehicle_id": msg.vehicle_id,
        "command": msg.command.value,
        "mission": mission,
        "payload": payload,
        "dispersal_mode": None if msg.dispersal_mode is None else msg.dispersal_mode.value,
    }


def encode_message(msg: TelemetryMessage | CommandMessage) -> bytes:
    if isinstance(msg, TelemetryMessage):
        tag, payload = TELEMETRY_TAG, _telemetry_payload(msg)
    elif isinstance(msg, CommandMessage):
        tag, payload = COMMAND_TAG, _command_payload(msg)
    else:
        raise EncodingError("cannot encode %r" % type(msg).__name__)
    body = json.dumps(payload, separators=(",", ":")).encode("utf-8")
    if len(body) > MAX_PAYLOAD_BYTES:
        raise EncodingError("payload of %d bytes exceeds 64 KiB frame limit" % len(body))
    return FRAME_HEADER.pack(len(body), tag) + body


def _require(payload: dict, key: str):
    try:
        return payload[key]
    except (KeyError, TypeError):
        raise DecodeError("payload missing field %r" % key) from None


def _decode_telemetry(payload: dict) -> TelemetryMessage:
    pose = _require(payload, "pose")
    progress = _require(payload, "mission_progress")
    decision_raw = _require(payload, "last_decision")
    decision = None
    if decision_raw is not None:
        decision = (
            float(_require(decision_raw, "x")),
            float(_require(decision_raw, "y")),
            SubstrateClass(_require(decision_raw, "predicted")),
        )
    return TelemetryMessage(
        vehicle_id=str(_require(payload, "vehicle_id")),
        sequence=int(_require(payload, "sequence")),
        timestamp=float(_require(payload, "timestamp")),
        pose=Pose2D(
            float(_require(pose, "x")),
            float(_require(pose, "y")),
            float(_require(pose, "heading")),
        ),
        battery=float(_require(payload, "battery")),
        gauge=float(_require(payload, "gauge")),
        last_decision=decision,
        mission_progress=MissionProgress(
            active_index=int(_require(progress, "active_index")),
            complete=bool(_require(progress, "complete")),
        ),
    )


def _decode_command(payload: dict) -> CommandMessage:
    mission_raw = _require(payload, "mission")
    mission = None
    if mission_raw is not None:
        mission = Mission(
            waypoints=tuple(
                (float(w[0]), float(w[1])) for w in _require(mission_raw, "waypoints")
            ),
            arrival_radius=float(_require(mission_raw, "arrival_radius")),
            mode=MissionMode(_require(mission_raw, "mode")),
        )
    payload_raw = _require(payload, "payload")
    config = None
    if payload_raw is not None:
        config = PayloadConfig(
            kind=PayloadKind(_require(payload_raw, "kind")),
            bladder_capacity=float(_require(payload_raw, "bladder_capacity")),
            camera_footprint=float(_require(payload_raw, "camera_footprint")),
        )
    mode_raw = _require(payload, "dispersal_mode")
    return CommandMessage(
        vehicle_id=str(_require(payload, "vehicle_id")),
        command=CommandType(_require(payload, "command")),
        mission=mission,
        payload=config,
        dispersal_mode=None if mode_raw is None else DispersalMode(mode_raw),
    )


def decode_message(frame: bytes) -> TelemetryMessage | CommandMessage:
    if len(frame) < FRAME_HEADER.size:
        raise DecodeError("frame shorter than header")
    length, tag = FRAME_HEADER.unpack_from(frame)
    if length > MAX_PAYLOAD_BYTES:
        raise DecodeError("declared payload of %d bytes exceeds frame limit" % length)
    body = frame[FRAME_HEADER.size :]
    if len(body) != length:
        raise DecodeError("payload length %d does not match header %d" % (len(body), length))
    try:
        payload = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError("payload is not canonical JSON: %s" % exc) from None
    if not isinstance(payload, dict):
        raise DecodeError("payload must be a JSON object")
    try:
        if tag == TELEMETRY_TAG:
            return _decode_telemetry(payload)
        if tag == COMMAND_TAG:
            return _decode_command(payload)
    except DecodeError:
        raise
    except (InvalidParameterError, ValueError, TypeError, IndexError) as exc:
        raise DecodeError("invalid message fields: %s" % exc) from None
    raise DecodeError("unknown message tag %d" % tag)
