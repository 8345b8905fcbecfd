"""Pump gating and bladder accounting for larvae release.

The gate consumes classifier predictions, never ground truth; wasted
larvae are a measured outcome, not an input. Release volumes are capped
so the areal deployment density never exceeds 10,000 larvae per square
meter, and bladder arithmetic is arranged so that the sum of all released
volumes plus the final volume reproduces the initial volume to within one
representable unit (each step subtracts exactly; see release_step).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import InvalidParameterError
from .perception import Prediction
from .world import SubstrateClass

MAX_AREAL_DENSITY = 10_000.0  # larvae per square meter

DEFAULT_FLOW_RATE = 0.1  # liters/second
DEFAULT_LARVAE_DENSITY = 10_000.0  # larvae per liter


class DispersalMode(Enum):
    CLASSIFIER_GATED = "classifier_gated"
    CONSTANT_PUMP = "constant_pump"


@dataclass(frozen=True, slots=True)
class Bladder:
    capacity: float
    volume: float

    def __post_init__(self) -> None:
        if self.capacity < 0:
            raise InvalidParameterError("bladder capacity must be >= 0")
        if not 0.0 <= self.volume <= self.capacity:
            raise InvalidParameterError("bladder volume must be in [0, capacity]")

    @classmethod
    def full(cls, capacity: float) -> "Bladder":
        return cls(capacity=capacity, volume=capacity)


@dataclass(frozen=True, slots=True)
class PumpState:
    running: bool
    flow_rate: float = DEFAULT_FLOW_RATE
    larvae_density: float = DEFAULT_LARVAE_DENSITY

    def __post_init__(self) -> None:
        if self.flow_rate < 0 or self.larvae_density < 0:
            raise InvalidParameterError("pump flow_rate and larvae_density must be >= 0")


@dataclass(frozen=True, slots=True)
class GateCommand:
    pump_on: bool
    low_larvae_alert: bool


@dataclass(frozen=True, slots=True)
class ReleaseFragment:
    """Per-step release outcome; the mission loop wraps it into a full
    DispersalEvent with position, truth, and prediction context."""

    released_volume: float
    released_larvae: float
    low_larvae_alert: bool


@dataclass(frozen=True, slots=True)
class DispersalEvent:
    timestamp: float
    position: tuple[float, float]
    ground_truth: SubstrateClass
    predicted: SubstrateClass
    released_volume: float
    released_larvae: float
    cell_area: float


def gate_decision(
    mode: DispersalMode, prediction: Prediction, bladder: Bladder
) -> GateCommand:
    """Stateless pump on/off decision for the current frame. An empty
    bladder always gates off and raises the low-larvae alert."""
    if bladder.volume <= 0.0:
        return GateCommand(pump_on=False, low_larvae_alert=True)
    if mode is DispersalMode.CONSTANT_PUMP:
        return GateCommand(pump_on=True, low_larvae_alert=False)
    on = prediction.predicted is SubstrateClass.SUITABLE
    return GateCommand(pump_on=on, low_larvae_alert=False)


def release_step(
    bladder: Bladder,
    pump: PumpState,
    dt: float,
    swath_width: float,
    speed: float,
) -> tuple[Bladder, ReleaseFragment]:
    """Release larvae for one step and decrement the bladder.

    The effective flow is capped so released larvae spread over the strip
    swept this step (swath_width * |speed| * dt) stay at or below
    MAX_AREAL_DENSITY; a stationary vehicle sweeps no area and releases
    nothing. Starvation releases the remainder and raises the empty
    alert. The subtraction is ordered so each released volume is exactly
    the bladder decrement, keeping mission totals conservative.
    """
    if dt <= 0:
        raise InvalidParameterError("dt must be positive")
    if swath_width <= 0:
        raise InvalidParameterError("swath_width must be positive")

    if not pump.running or pump.flow_rate == 0.0 or bladder.volume <= 0.0:
        alert = bladder.volume <= 0.0
        return bladder, ReleaseFragment(0.0, 0.0, alert)

    flow = pump.flow_rate
    if pump.larvae_density > 0.0:
        covered = swath_width * abs(speed) * dt
        max_flow = MAX_AREAL_DENSITY * covered / (pump.larvae_density * dt)
        flow = min(flow, max_flow)

    demand = flow * dt
    if demand >= bladder.volume:
        released = bladder.volume
        remaining = 0.0
        alert = True
    else:
        remaining = bladder.volume - demand
        released = bladder.volume - remaining
        alert = False

    fragment = ReleaseFragment(
        released_volume=released,
        released_larvae=released * pump.larvae_density,
        low_larvae_alert=alert,
    )
    return Bladder(capacity=bladder.capacity, volume=remaining), fragment


def fuel_gauge(bladder: Bladder) -> float:
    """Remaining larvae fraction shown to the operator."""
    if bladder.capacity <= 0:
        raise InvalidParameterError("fuel gauge needs a positive capacity")
    return bladder.volume / bladder.capacity
