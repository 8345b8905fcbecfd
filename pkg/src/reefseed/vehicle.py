"""Differential-drive surface vehicle: kinematics, battery, payloads.

The vehicle is modeled as a unicycle driven by two normalized thruster
settings. Forward speed is the thruster mean scaled to the cruise speed;
yaw rate is the thruster difference scaled to the turn-rate limit. Wind
displaces the hull directly. Battery drain is proportional to mean
absolute thrust, sized so continuous full thrust exhausts the pack in
exactly the rated endurance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import InvalidParameterError, InvalidStateError
from .world import WindField, wind_drift

CRUISE_SPEED = 0.75  # m/s at full symmetric thrust
YAW_RATE_MAX = 0.5  # rad/s at full differential thrust
FULL_THRUST_ENDURANCE = 7200.0  # seconds of battery at 100% duty
MAX_STEP_DT = 1.0  # explicit Euler stays well-behaved below this

DEFAULT_BLADDER_CAPACITY = 100.0  # liters
DEFAULT_CAMERA_FOOTPRINT = 3.0  # meters, imaged swath width


class PayloadKind(Enum):
    COLLECTION = "collection"
    DISPERSAL = "dispersal"
    MONITORING = "monitoring"


@dataclass(frozen=True, slots=True)
class PayloadConfig:
    """Mission payload fitted to a vehicle.

    Only dispersal payloads carry a bladder; only monitoring payloads
    carry a survey camera. The collection rig mounts aft, so vehicles
    carrying it drive stern-first (handled in :func:`configure_payload`).
    """

    kind: PayloadKind
    bladder_capacity: float = 0.0
    camera_footprint: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is PayloadKind.DISPERSAL and self.bladder_capacity <= 0:
            raise InvalidParameterError("dispersal payload needs a positive bladder capacity")
        if self.kind is PayloadKind.MONITORING and self.camera_footprint <= 0:
            raise InvalidParameterError("monitoring payload needs a positive camera footprint")

    @classmethod
    def collection(cls) -> "PayloadConfig":
        return cls(kind=PayloadKind.COLLECTION)

    @classmethod
    def dispersal(cls, bladder_capacity: float = DEFAULT_BLADDER_CAPACITY) -> "PayloadConfig":
        return cls(kind=PayloadKind.DISPERSAL, bladder_capacity=bladder_capacity)

    @classmethod
    def monitoring(cls, camera_footprint: float = DEFAULT_CAMERA_FOOTPRINT) -> "PayloadConfig":
        return cls(kind=PayloadKind.MONITORING, camera_footprint=camera_footprint)


@dataclass(frozen=True, slots=True)
class Pose2D:
    x: float
    y: float
    heading: float  # radians, normalized to (-pi, pi]


@dataclass(frozen=True, slots=True)
class ThrusterCommand:
    """Normalized left/right thrust in [-1, 1]; out-of-range values clamp."""

    left: float
    right: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", min(1.0, max(-1.0, self.left)))
        object.__setattr__(self, "right", min(1.0, max(-1.0, self.right)))


STOP = ThrusterCommand(0.0, 0.0)


@dataclass(frozen=True, slots=True)
class VehicleState:
    pose: Pose2D
    speed: float = 0.0  # signed ground speed along heading, m/s
    battery: float = 1.0  # remaining fraction in [0, 1]
    payload: PayloadConfig | None = None
    bladder_volume: float = 0.0  # liters on board
    drive_sign: float = 1.0  # -1 when driving stern-first


def wrap_heading(angle: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    r = math.fmod(angle + math.pi, 2.0 * math.pi)
    if r <= 0.0:
        r += 2.0 * math.pi
    return r - math.pi


def step_dynamics(
    state: VehicleState,
    command: ThrusterCommand,
    wind: WindField,
    dt: float,
    t: float = 0.0,
) -> VehicleState:
    """Advance the vehicle one explicit-Euler step of length ``dt``.

    ``t`` is the simulation time at the start of the step, used only to
    evaluate the wind gust phase. A dead battery zeroes thrust but the
    hull still drifts with the wind.
    """
    if not 0.0 < dt <= MAX_STEP_DT:
        raise InvalidParameterError("dt must be in (0, %g]" % MAX_STEP_DT)

    if state.battery <= 0.0:
        v = 0.0
        omega = 0.0
        drain = 0.0
    else:
        v = state.drive_sign * CRUISE_SPEED * (command.left + command.right) / 2.0
        omega = YAW_RATE_MAX * (command.right - command.left) / 2.0
        drain = (abs(command.left) + abs(command.right)) / 2.0 * dt / FULL_THRUST_ENDURANCE

    wx, wy = wind_drift(wind, t)
    pose = state.pose
    x = pose.x + (v * math.cos(pose.heading) + wx) * dt
    y = pose.y + (v * math.sin(pose.heading) + wy) * dt
    heading = wrap_heading(pose.heading + omega * dt)

    return replace(
        state,
        pose=Pose2D(x, y, heading),
        speed=v,
        battery=max(0.0, state.battery - drain),
    )


def configure_payload(state: VehicleState, payload: PayloadConfig) -> VehicleState:
    """Fit a payload to a stationary vehicle.

    Swapping hardware underway is not a thing; callers must stop first.
    Fitting a dispersal rig fills the bladder to capacity, any other rig
    drains it. The collection rig reverses the drive direction.
    """
    if abs(state.speed) >= 0.01:
        raise InvalidStateError("payload can only be configured while stationary")
    if payload.kind is PayloadKind.DISPERSAL:
        volume = payload.bladder_capacity
    else:
        volume = 0.0
    sign = -1.0 if payload.kind is PayloadKind.COLLECTION else 1.0
    return replace(state, payload=payload, bladder_volume=volume, drive_sign=sign)


def endurance_estimate(state: VehicleState, duty: float) -> float:
    """Seconds of battery left at a constant mean-absolute-thrust duty."""
    if duty <= 0.0:
        raise InvalidParameterError("duty must be positive")
    return state.battery * FULL_THRUST_ENDURANCE / min(1.0, duty)
