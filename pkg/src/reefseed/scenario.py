"""Scenario configs: YAML loading, field-level validation, and presets.

A scenario file pins everything a run needs (map, vehicle, mission,
classifier, dispersal, seed, tick rate), so one file plus its seed
reproduces an identical event log byte for byte. Validation collects
every problem with its field path instead of stopping at the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import yaml

from .dispersal import DEFAULT_FLOW_RATE, DEFAULT_LARVAE_DENSITY, DispersalMode
from .errors import ConfigurationError
from .guidance import Mission, MissionMode
from .perception import MODEL_RECALLS
from .world import WindField

DEFAULT_TICK_RATE = 2.0  # decisions per second


@dataclass(frozen=True, slots=True)
class MapSpec:
    width_cells: int
    height_cells: int
    cell_size: float
    suitable_fraction: float
    clustering: float
    origin: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True, slots=True)
class VehicleSpec:
    start: tuple[float, float]
    heading: float = 0.0
    bladder_capacity: float = 100.0
    swath_width: float = 2.0


@dataclass(frozen=True, slots=True)
class ClassifierSpec:
    model: str | None = None
    recall_suitable: float | None = None
    recall_unsuitable: float | None = None
    sticky_frames: int = 0

    def recalls(self) -> tuple[float, float]:
        if self.model is not None:
            return MODEL_RECALLS[self.model]
        return self.recall_suitable, self.recall_unsuitable


@dataclass(frozen=True, slots=True)
class DispersalSpec:
    mode: DispersalMode
    flow_rate: float = DEFAULT_FLOW_RATE
    larvae_density: float = DEFAULT_LARVAE_DENSITY


@dataclass(frozen=True, slots=True)
class Scenario:
    name: str
    seed: int
    map_spec: MapSpec | None
    map_file: str | None
    vehicle: VehicleSpec
    classifier: ClassifierSpec
    dispersal: DispersalSpec
    mission: Mission | None = None
    coverage_region: tuple[float, float, float, float] | None = None
    track_width: float = 2.0
    arrival_radius: float = 1.0
    tick_rate: float = DEFAULT_TICK_RATE
    duration_limit: float = 7200.0
    wind: WindField = field(default_factory=WindField)


def _number(data, path, key, errors, default=None, minimum=None, positive=False):
    value = data.get(key, default)
    if value is None:
        errors.append("%s.%s: required" % (path, key))
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append("%s.%s: expected a number, got %r" % (path, key, value))
        return None
    value = float(value)
    if positive and value <= 0:
        errors.append("%s.%s: must be > 0" % (path, key))
        return None
    if minimum is not None and value < minimum:
        errors.append("%s.%s: must be >= %g" % (path, key, minimum))
        return None
    return value


def _integer(data, path, key, errors, default=None, minimum=None):
    value = data.get(key, default)
    if value is None:
        errors.append("%s.%s: required" % (path, key))
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append("%s.%s: expected an integer, got %r" % (path, key, value))
        return None
    if minimum is not None and value < minimum:
        errors.append("%s.%s: must be >= %d" % (path, key, minimum))
        return None
    return value


def _pair(data, path, key, errors, default=None):
    value = data.get(key, default)
    if value is None:
        errors.append("%s.%s: required" % (path, key))
        return None
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        errors.append("%s.%s: expected [x, y]" % (path, key))
        return None
    return (float(value[0]), float(value[1]))


def _section(data, key, errors, required=True):
    value = data.get(key)
    if value is None:
        if required:
            errors.append("%s: required section" % key)
        return None
    if not isinstance(value, dict):
        errors.append("%s: expected a mapping" % key)
        return None
    return value


def _parse_map(data, errors):
    if "map_file" in data:
        if "map" in data:
            errors.append("map: give either map or map_file, not both")
        path = data["map_file"]
        if not isinstance(path, str) or not path:
            errors.append("map_file: expected a file path")
            return None, None
        return None, path
    section = _section(data, "map", errors)
    if section is None:
        return None, None
    width = _integer(section, "map", "width_cells", errors, minimum=1)
    height = _integer(section, "map", "height_cells", errors, minimum=1)
    cell = _number(section, "map", "cell_size", errors, positive=True)
    fraction = _number(section, "map", "suitable_fraction", errors, minimum=0.0)
    clustering = _number(section, "map", "clustering", errors, default=0.7, minimum=0.0)
    origin = _pair(section, "map", "origin", errors, default=[0.0, 0.0])
    if fraction is not None and fraction > 1.0:
        errors.append("map.suitable_fraction: must be <= 1")
    if clustering is not None and clustering > 1.0:
        errors.append("map.clustering: must be <= 1")
    if errors or None in (width, height, cell, fraction, clustering, origin):
        return None, None
    return (
        MapSpec(width, height, cell, fraction, clustering, origin),
        None,
    )


def _parse_mission(data, errors):
    section = _section(data, "mission", errors)
    if section is None:
        return None, None, 2.0, 1.0
    arrival = _number(section, "mission", "arrival_radius", errors, default=1.0, positive=True)
    has_waypoints = "waypoints" in section
    has_region = "coverage_region" in section
    if has_waypoints == has_region:
        errors.append("mission: give exactly one of waypoints or coverage_region")
        return None, None, 2.0, arrival or 1.0
    if has_waypoints:
        raw = section["waypoints"]
        if not isinstance(raw, list) or not raw:
            errors.append("mission.waypoints: expected a nonempty list of [x, y]")
            return None, None, 2.0, arrival or 1.0
        waypoints = []
        for i, wp in enumerate(raw):
            if not isinstance(wp, (list, tuple)) or len(wp) != 2:
                errors.append("mission.waypoints[%d]: expected [x, y]" % i)
                return None, None, 2.0, arrival or 1.0
            waypoints.append((float(wp[0]), float(wp[1])))
        mission = Mission(
            waypoints=tuple(waypoints),
            arrival_radius=arrival or 1.0,
            mode=MissionMode.TRANSECT,
        )
        return mission, None, 2.0, arrival or 1.0
    region_raw = section["coverage_region"]
    region = None
    if (
        not isinstance(region_raw, (list, tuple))
        or len(region_raw) != 4
        or not all(isinstance(v, (int, float)) for v in region_raw)
    ):
        errors.append("mission.coverage_region: expected [x0, y0, x1, y1]")
    else:
        region = tuple(float(v) for v in region_raw)
        if region[2] <= region[0] or region[3] <= region[1]:
            errors.append("mission.coverage_region: must have positive extent")
            region = None
    track = _number(section, "mission", "track_width", errors, default=2.0, positive=True)
    return None, region, track or 2.0, arrival or 1.0


def _parse_classifier(data, errors):
    section = _section(data, "classifier", errors)
    if section is None:
        return None
    sticky = _integer(section, "classifier", "sticky_frames", errors, default=0, minimum=0)
    model = section.get("model")
    if model is not None:
        if model not in MODEL_RECALLS:
            errors.append(
                "classifier.model: unknown name %r (expected one of %s)"
                % (model, ", ".join(sorted(MODEL_RECALLS)))
            )
            return None
        return ClassifierSpec(model=model, sticky_frames=sticky or 0)
    rs = _number(section, "classifier", "recall_suitable", errors, minimum=0.0)
    ru = _number(section, "classifier", "recall_unsuitable", errors, minimum=0.0)
    for key, value in (("recall_suitable", rs), ("recall_unsuitable", ru)):
        if value is not None and value > 1.0:
            errors.append("classifier.%s: must be <= 1" % key)
    if rs is None or ru is None:
        return None
    return ClassifierSpec(
        recall_suitable=rs, recall_unsuitable=ru, sticky_frames=sticky or 0
    )


def _parse_dispersal(data, errors):
    section = _section(data, "dispersal", errors)
    if section is None:
        return None
    mode_raw = section.get("mode")
    try:
        mode = DispersalMode(mode_raw)
    except ValueError:
        errors.append(
            "dispersal.mode: expected one of %s, got %r"
            % (", ".join(m.value for m in DispersalMode), mode_raw)
        )
        return None
    flow = _number(section, "dispersal", "flow_rate", errors, default=DEFAULT_FLOW_RATE, minimum=0.0)
    density = _number(
        section, "dispersal", "larvae_density", errors,
        default=DEFAULT_LARVAE_DENSITY, minimum=0.0,
    )
    if flow is None or density is None:
        return None
    return DispersalSpec(mode=mode, flow_rate=flow, larvae_density=density)


def _parse_wind(data, errors):
    section = data.get("wind")
    if section is None:
        return WindField()
    if not isinstance(section, dict):
        errors.append("wind: expected a mapping")
        return WindField()
    velocity = _pair(section, "wind", "velocity", errors, default=[0.0, 0.0])
    amplitude = _number(section, "wind", "gust_amplitude", errors, default=0.0, minimum=0.0)
    period = _number(section, "wind", "gust_period", errors, default=60.0, positive=True)
    if velocity is None or amplitude is None or period is None:
        return WindField()
    return WindField(velocity=velocity, gust_amplitude=amplitude, gust_period=period)


def validate_scenario_dict(data) -> list[str]:
    """Field-level validation messages; empty when the scenario is usable."""
    if not isinstance(data, dict):
        return ["scenario: expected a mapping at top level"]
    errors: list[str] = []

    name = data.get("name", "scenario")
    if not isinstance(name, str) or not name:
        errors.append("name: expected a nonempty string")
    _integer(data, "scenario", "seed", errors, default=0)
    _number(data, "scenario", "tick_rate", errors, default=DEFAULT_TICK_RATE, positive=True)
    _number(data, "scenario", "duration_limit", errors, default=7200.0, minimum=0.0)
    tick = data.get("tick_rate", DEFAULT_TICK_RATE)
    if isinstance(tick, (int, float)) and not isinstance(tick, bool) and tick > 0:
        if 1.0 / tick > 1.0:
            errors.append("scenario.tick_rate: must be >= 1 Hz (step stability)")

    _parse_map(data, errors)

    vehicle = _section(data, "vehicle", errors)
    if vehicle is not None:
        _pair(vehicle, "vehicle", "start", errors)
        _number(vehicle, "vehicle", "heading", errors, default=0.0)
        _number(vehicle, "vehicle", "bladder_capacity", errors, default=100.0, positive=True)
        _number(vehicle, "vehicle", "swath_width", errors, default=2.0, positive=True)

    _parse_mission(data, errors)
    _parse_classifier(data, errors)
    _parse_dispersal(data, errors)
    _parse_wind(data, errors)
    return errors


def scenario_from_dict(data) -> Scenario:
    errors = validate_scenario_dict(data)
    if errors:
        raise ConfigurationError("invalid scenario:\n" + "\n".join(errors))

    silent: list[str] = []
    map_spec, map_file = _parse_map(data, silent)
    mission, region, track_width, arrival = _parse_mission(data, silent)
    vehicle_section = data["vehicle"]
    vehicle = VehicleSpec(
        start=tuple(float(v) for v in vehicle_section["start"]),
        heading=float(vehicle_section.get("heading", 0.0)),
        bladder_capacity=float(vehicle_section.get("bladder_capacity", 100.0)),
        swath_width=float(vehicle_section.get("swath_width", 2.0)),
    )
    return Scenario(
        name=data.get("name", "scenario"),
        seed=int(data.get("seed", 0)),
        map_spec=map_spec,
        map_file=map_file,
        vehicle=vehicle,
        classifier=_parse_classifier(data, silent),
        dispersal=_parse_dispersal(data, silent),
        mission=mission,
        coverage_region=region,
        track_width=track_width,
        arrival_radius=arrival,
        tick_rate=float(data.get("tick_rate", DEFAULT_TICK_RATE)),
        duration_limit=float(data.get("duration_limit", 7200.0)),
        wind=_parse_wind(data, silent),
    )


PRESET_NAMES = ("loomis-gated", "watson-gated", "loomis-constant", "watson-constant")


def load_preset(name: str) -> Scenario:
    if name not in PRESET_NAMES:
        raise ConfigurationError(
            "unknown preset %r; expected one of %s" % (name, ", ".join(PRESET_NAMES))
        )
    text = resources.files("reefseed.presets").joinpath(name + ".yaml").read_text()
    return scenario_from_dict(yaml.safe_load(text))


def load_scenario(path: str) -> Scenario:
    """Scenario from a YAML file path, or a preset when the name matches."""
    if path in PRESET_NAMES:
        return load_preset(path)
    with open(path, "r", encoding="utf-8") as stream:
        data = yaml.safe_load(stream)
    return scenario_from_dict(data)


def scenario_ticks(scenario: Scenario) -> tuple[float, int]:
    """(dt, tick budget) for the run loop."""
    dt = 1.0 / scenario.tick_rate
    return dt, int(math.floor(scenario.duration_limit / dt + 1e-9))
