"""Seeded mission simulation and its file outputs.

One run steps guidance, vehicle dynamics, classification, and dispersal
at the scenario tick rate until the mission completes, the battery dies,
or the duration limit trips. The classifier stream is derived from the
scenario seed but decoupled from the map-noise stream, and it is consumed
identically in both dispersal modes, so gated and constant runs of one
scenario share trajectory and predictions frame for frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .dispersal import Bladder, DispersalEvent, DispersalMode, PumpState, gate_decision, fuel_gauge, release_step
from .errors import DataIntegrityError, OutOfBoundsError
from .guidance import Mission, follow_path, plan_coverage
from .metrics import MetricsReport, compute_report
from .perception import ClassifierModel
from .scenario import Scenario, scenario_ticks
from .vehicle import PayloadConfig, Pose2D, VehicleState, configure_payload, step_dynamics
from .world import BenthicMap, SubstrateClass, generate_reef, load_map, sample_substrate

EVENT_SCHEMA = "reefseed-events/1"

# Keeps the classifier's draw stream disjoint from the map generator's,
# which is seeded with the raw scenario seed.
_CLASSIFIER_SEED_OFFSET = 7919


@dataclass(frozen=True, slots=True)
class TrajectoryPoint:
    t: float
    x: float
    y: float
    heading: float
    battery: float
    gauge: float
    active_index: int
    predicted: SubstrateClass | None
    released: bool


@dataclass(frozen=True, slots=True)
class SimulationResult:
    scenario: Scenario
    reef: BenthicMap
    mission: Mission
    events: list[DispersalEvent]
    trajectory: list[TrajectoryPoint]
    report: MetricsReport
    end_reason: str  # mission_complete | battery_dead | duration_limit
    elapsed: float
    exhausted_at: float | None
    skipped_frames: int  # positions outside the map, no decision possible

    @property
    def timed_out(self) -> bool:
        return self.end_reason == "duration_limit"


def build_reef(scenario: Scenario) -> BenthicMap:
    if scenario.map_file is not None:
        with open(scenario.map_file, "r", encoding="utf-8") as stream:
            return load_map(stream)
    spec = scenario.map_spec
    return generate_reef(
        seed=scenario.seed,
        width_cells=spec.width_cells,
        height_cells=spec.height_cells,
        cell_size=spec.cell_size,
        target_suitable_fraction=spec.suitable_fraction,
        clustering=spec.clustering,
        origin=spec.origin,
    )


def build_mission(scenario: Scenario) -> Mission:
    if scenario.mission is not None:
        return scenario.mission
    return plan_coverage(
        scenario.coverage_region,
        scenario.track_width,
        arrival_radius=scenario.arrival_radius,
    )


def build_classifier(scenario: Scenario, vehicle_index: int = 0) -> ClassifierModel:
    recall_suitable, recall_unsuitable = scenario.classifier.recalls()
    return ClassifierModel(
        recall_suitable,
        recall_unsuitable,
        rng_seed=scenario.seed + _CLASSIFIER_SEED_OFFSET + vehicle_index,
        sticky_frames=scenario.classifier.sticky_frames,
    )


def run_scenario(scenario: Scenario, mode: DispersalMode | None = None) -> SimulationResult:
    """Run a scenario to completion; ``mode`` overrides the configured
    dispersal mode (used by compare_modes to share one trajectory)."""
    mode = scenario.dispersal.mode if mode is None else mode
    reef = build_reef(scenario)
    mission = build_mission(scenario)
    model = build_classifier(scenario)
    dt, tick_budget = scenario_ticks(scenario)

    state = VehicleState(
        pose=Pose2D(scenario.vehicle.start[0], scenario.vehicle.start[1], scenario.vehicle.heading)
    )
    state = configure_payload(state, PayloadConfig.dispersal(scenario.vehicle.bladder_capacity))
    bladder = Bladder.full(scenario.vehicle.bladder_capacity)
    flow = scenario.dispersal.flow_rate
    density = scenario.dispersal.larvae_density
    swath = scenario.vehicle.swath_width
    cell_area = reef.cell_area
    wind = scenario.wind

    events: list[DispersalEvent] = []
    trajectory: list[TrajectoryPoint] = []
    active = 0
    t = 0.0
    exhausted_at: float | None = None
    skipped = 0
    end_reason = "duration_limit"

    for _ in range(tick_budget):
        step = follow_path(state, mission, active)
        active = step.active_index
        if step.mission_complete:
            end_reason = "mission_complete"
            break
        state = step_dynamics(state, step.command, wind, dt, t=t)
        t += dt

        predicted = None
        released = False
        position = (state.pose.x, state.pose.y)
        try:
            truth = sample_substrate(reef, position)
        except OutOfBoundsError:
            truth = None
            skipped += 1
        if truth is not None:
            prediction = model.classify_frame(truth, timestamp=t)
            predicted = prediction.predicted
            gate = gate_decision(mode, prediction, bladder)
            pump = PumpState(running=gate.pump_on, flow_rate=flow, larvae_density=density)
            bladder, fragment = release_step(bladder, pump, dt, swath, state.speed)
            released = fragment.released_volume > 0.0
            if exhausted_at is None and released and bladder.volume == 0.0:
                exhausted_at = t
            events.append(
                DispersalEvent(
                    timestamp=t,
                    position=position,
                    ground_truth=truth,
                    predicted=predicted,
                    released_volume=fragment.released_volume,
                    released_larvae=fragment.released_larvae,
                    cell_area=cell_area,
                )
            )
        trajectory.append(
            TrajectoryPoint(
                t=t,
                x=state.pose.x,
                y=state.pose.y,
                heading=state.pose.heading,
                battery=state.battery,
                gauge=fuel_gauge(bladder),
                active_index=active,
                predicted=predicted,
                released=released,
            )
        )
        if state.battery <= 0.0:
            end_reason = "battery_dead"
            break

    report = compute_report(events, mode, origin=reef.origin, exhausted_at=exhausted_at)
    return SimulationResult(
        scenario=scenario,
        reef=reef,
        mission=mission,
        events=events,
        trajectory=trajectory,
        report=report,
        end_reason=end_reason,
        elapsed=t,
        exhausted_at=exhausted_at,
        skipped_frames=skipped,
    )


@dataclass(frozen=True, slots=True)
class ModeComparison:
    gated: SimulationResult
    constant: SimulationResult

    @property
    def wasted_delta(self) -> float:
        return self.constant.report.wasted_larvae_pct - self.gated.report.wasted_larvae_pct


def compare_modes(scenario: Scenario) -> ModeComparison:
    """The same seeded scenario under both dispersal modes. Trajectories
    and prediction streams match exactly; only pump behavior differs."""
    gated = run_scenario(scenario, mode=DispersalMode.CLASSIFIER_GATED)
    constant = run_scenario(scenario, mode=DispersalMode.CONSTANT_PUMP)
    return ModeComparison(gated=gated, constant=constant)


def _event_header(result: SimulationResult, mode: DispersalMode) -> dict:
    reef = result.reef
    return {
        "schema": EVENT_SCHEMA,
        "scenario": result.scenario.name,
        "seed": result.scenario.seed,
        "mode": mode.value,
        "tick_rate": result.scenario.tick_rate,
        "map": {
            "origin": [reef.origin[0], reef.origin[1]],
            "cell_size": reef.cell_size,
            "width_cells": reef.width_cells,
            "height_cells": reef.height_cells,
        },
    }


def write_event_log(result: SimulationResult, path: str) -> None:
    """Newline-delimited event records with a header and end marker."""
    with open(path, "w", encoding="utf-8") as stream:
        stream.write(json.dumps(_event_header(result, result.report.mode), separators=(",", ":")))
        stream.write("\n")
        for ev in result.events:
            record = {
                "t": ev.timestamp,
                "x": ev.position[0],
                "y": ev.position[1],
                "truth": ev.ground_truth.value,
                "predicted": ev.predicted.value,
                "released_volume": ev.released_volume,
                "released_larvae": ev.released_larvae,
                "cell_area": ev.cell_area,
            }
            stream.write(json.dumps(record, separators=(",", ":")))
            stream.write("\n")
        end = {
            "end": {
                "reason": result.end_reason,
                "elapsed": result.elapsed,
                "exhausted_at": result.exhausted_at,
                "skipped_frames": result.skipped_frames,
            }
        }
        stream.write(json.dumps(end, separators=(",", ":")))
        stream.write("\n")


@dataclass(frozen=True, slots=True)
class EventLog:
    header: dict
    events: list[DispersalEvent]
    end: dict

    @property
    def mode(self) -> DispersalMode:
        return DispersalMode(self.header["mode"])

    @property
    def origin(self) -> tuple[float, float]:
        ox, oy = self.header["map"]["origin"]
        return (ox, oy)


def read_event_log(path: str) -> EventLog:
    with open(path, "r", encoding="utf-8") as stream:
        lines = [line for line in stream.read().splitlines() if line]
    if not lines:
        raise DataIntegrityError("event log is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DataIntegrityError("bad event log header: %s" % exc) from None
    if header.get("schema") != EVENT_SCHEMA:
        raise DataIntegrityError(
            "unsupported event log schema %r" % header.get("schema")
        )
    events = []
    end: dict = {}
    for line in lines[1:]:
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataIntegrityError("bad event record: %s" % exc) from None
        if "end" in record:
            end = record["end"]
            continue
        try:
            events.append(
                DispersalEvent(
                    timestamp=record["t"],
                    position=(record["x"], record["y"]),
                    ground_truth=SubstrateClass(record["truth"]),
                    predicted=SubstrateClass(record["predicted"]),
                    released_volume=record["released_volume"],
                    released_larvae=record["released_larvae"],
                    cell_area=record["cell_area"],
                )
            )
        except (KeyError, ValueError) as exc:
            raise DataIntegrityError("bad event record: %s" % exc) from None
    return EventLog(header=header, events=events, end=end)


def report_from_log(log: EventLog) -> MetricsReport:
    return compute_report(
        log.events,
        log.mode,
        origin=log.origin,
        exhausted_at=log.end.get("exhausted_at"),
    )


def write_trajectory_csv(result: SimulationResult, path: str) -> None:
    with open(path, "w", encoding="utf-8") as stream:
        stream.write("t,x,y,heading,battery,gauge,waypoint,predicted,released\n")
        for p in result.trajectory:
            stream.write(
                "%r,%r,%r,%r,%r,%r,%d,%s,%d\n"
                % (
                    p.t, p.x, p.y, p.heading, p.battery, p.gauge, p.active_index,
                    "" if p.predicted is None else p.predicted.value,
                    1 if p.released else 0,
                )
            )


def write_report_json(result: SimulationResult, path: str) -> None:
    payload = result.report.to_dict() | {
        "scenario": result.scenario.name,
        "seed": result.scenario.seed,
        "end_reason": result.end_reason,
        "elapsed_s": result.elapsed,
        "events": len(result.events),
        "skipped_frames": result.skipped_frames,
    }
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(payload, stream, indent=2, sort_keys=True)
        stream.write("\n")


def telemetry_frames(result: SimulationResult, vehicle_id: str = "asv-1") -> list[dict]:
    """Console-feed payloads for a finished run, one per tick, in the
    exact JSON shape the fleet service broadcasts."""
    frames = []
    last = len(result.trajectory) - 1
    for seq, point in enumerate(result.trajectory):
        decision = None
        if point.predicted is not None:
            decision = {"x": point.x, "y": point.y, "predicted": point.predicted.value}
        frames.append(
            {
                "vehicle_id": vehicle_id,
                "sequence": seq,
                "timestamp": point.t,
                "pose": {"x": point.x, "y": point.y, "heading": point.heading},
                "battery": point.battery,
                "gauge": point.gauge,
                "last_decision": decision,
                "mission_progress": {
                    "active_index": point.active_index,
                    "complete": result.end_reason == "mission_complete" and seq == last,
                },
            }
        )
    return frames
