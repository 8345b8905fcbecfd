"""Fleet-control layer: wire protocol, session registry, network service."""

from .protocol import (
    COMMAND_TAG,
    MAX_PAYLOAD_BYTES,
    TELEMETRY_TAG,
    CommandMessage,
    CommandType,
    MissionProgress,
    TelemetryMessage,
    decode_message,
    encode_message,
)
from .registry import (
    DEFAULT_STALE_TIMEOUT,
    FleetRegistry,
    VehicleSession,
    accept_command,
    dispatch_formation,
    record_telemetry,
    register_vehicle,
    staleness_sweep,
    unregister_vehicle,
)

__all__ = [
    "COMMAND_TAG",
    "MAX_PAYLOAD_BYTES",
    "TELEMETRY_TAG",
    "CommandMessage",
    "CommandType",
    "MissionProgress",
    "TelemetryMessage",
    "decode_message",
    "encode_message",
    "DEFAULT_STALE_TIMEOUT",
    "FleetRegistry",
    "VehicleSession",
    "accept_command",
    "dispatch_formation",
    "record_telemetry",
    "register_vehicle",
    "staleness_sweep",
    "unregister_vehicle",
]
