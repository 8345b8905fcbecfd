"""Fleet session bookkeeping and formation dispatch.

The registry holds at most seven vehicle sessions. Telemetry refreshes a
session's last-seen time; a staleness sweep flags sessions that have gone
quiet, and flagged vehicles accept only safety commands until telemetry
resumes. Stop is always accepted for a registered vehicle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import DispatchError, FleetCapacityError, InvalidParameterError
from ..guidance import (
    MAX_FLEET_SIZE,
    FormationSpec,
    Mission,
    formation_offsets,
)
from .protocol import CommandMessage, CommandType, TelemetryMessage

DEFAULT_STALE_TIMEOUT = 10.0  # seconds without telemetry

# Commands a stale vehicle still accepts; mission starts and uploads wait
# for telemetry to resume.
_STALE_SAFE_COMMANDS = frozenset(
    {CommandType.STOP, CommandType.RETURN_HOME, CommandType.SET_DISPERSAL_MODE,
     CommandType.SET_PAYLOAD}
)


@dataclass
class VehicleSession:
    vehicle_id: str
    last_seen: float
    stale: bool = False
    last_sequence: int = -1


@dataclass
class FleetRegistry:
    sessions: dict[str, VehicleSession] = field(default_factory=dict)

    def active_ids(self) -> list[str]:
        return sorted(vid for vid, s in self.sessions.items() if not s.stale)


def register_vehicle(
    registry: FleetRegistry, vehicle_id: str, now: float = 0.0
) -> FleetRegistry:
    """Add a session, or refresh last-seen for an already-known vehicle."""
    if not vehicle_id:
        raise InvalidParameterError("vehicle_id must be nonempty")
    session = registry.sessions.get(vehicle_id)
    if session is not None:
        session.last_seen = now
        return registry
    if len(registry.sessions) >= MAX_FLEET_SIZE:
        raise FleetCapacityError(
            "fleet already has %d vehicles; cannot register %r"
            % (MAX_FLEET_SIZE, vehicle_id)
        )
    registry.sessions[vehicle_id] = VehicleSession(vehicle_id=vehicle_id, last_seen=now)
    return registry


def unregister_vehicle(registry: FleetRegistry, vehicle_id: str) -> FleetRegistry:
    registry.sessions.pop(vehicle_id, None)
    return registry


def record_telemetry(
    registry: FleetRegistry, msg: TelemetryMessage, now: float
) -> bool:
    """Fold one telemetry message into its session.

    Returns False (leaving the session untouched) for out-of-order
    sequence numbers; raises for vehicles that never registered.
    """
    session = registry.sessions.get(msg.vehicle_id)
    if session is None:
        raise DispatchError("telemetry from unregistered vehicle %r" % msg.vehicle_id)
    if msg.sequence <= session.last_sequence:
        return False
    session.last_sequence = msg.sequence
    session.last_seen = now
    return True


def staleness_sweep(
    registry: FleetRegistry, now: float, timeout: float = DEFAULT_STALE_TIMEOUT
) -> list[str]:
    """Re-evaluate every session's staleness flag; returns stale ids."""
    if timeout <= 0:
        raise InvalidParameterError("timeout must be positive")
    stale = []
    for session in registry.sessions.values():
        session.stale = (now - session.last_seen) > timeout
        if session.stale:
            stale.append(session.vehicle_id)
    return sorted(stale)


def accept_command(registry: FleetRegistry, msg: CommandMessage) -> None:
    """Validate a command against session state; raises DispatchError when
    it must not be forwarded to the vehicle."""
    session = registry.sessions.get(msg.vehicle_id)
    if session is None:
        raise DispatchError("command for unregistered vehicle %r" % msg.vehicle_id)
    if session.stale and msg.command not in _STALE_SAFE_COMMANDS:
        raise DispatchError(
            "vehicle %r is stale; %s held until telemetry resumes"
            % (msg.vehicle_id, msg.command.value)
        )


def dispatch_formation(
    registry: FleetRegistry, base_mission: Mission, spec: FormationSpec
) -> dict[str, Mission]:
    """Per-vehicle missions: the base mission translated by each formation
    offset, oriented along the base mission's first leg."""
    active = registry.active_ids()
    if spec.count > len(active):
        raise DispatchError(
            "formation needs %d vehicles but only %d are active"
            % (spec.count, len(active))
        )

    waypoints = base_mission.waypoints
    if len(waypoints) >= 2:
        dx = waypoints[1][0] - waypoints[0][0]
        dy = waypoints[1][1] - waypoints[0][1]
        length = math.hypot(dx, dy)
        ux, uy = (dx / length, dy / length) if length > 0 else (1.0, 0.0)
    else:
        ux, uy = 1.0, 0.0

    missions = {}
    for vehicle_id, (lateral, longitudinal) in zip(
        active, formation_offsets(spec)
    ):
        # Lateral is measured to the left of the direction of travel.
        ox = longitudinal * ux - lateral * uy
        oy = longitudinal * uy + lateral * ux
        missions[vehicle_id] = Mission(
            waypoints=tuple((x + ox, y + oy) for x, y in waypoints),
            arrival_radius=base_mission.arrival_radius,
            mode=base_mission.mode,
        )
    return missions
