"""Field-trial accounting over dispersal event logs.

Percentages are area-weighted over the surveyed cells. Events are
rasterized onto the benthic grid (cell side = sqrt of the event's
cell_area) and a revisited cell is scored by the LAST decision made
there: the final pass determines whether larvae were ultimately released
or withheld on that patch. Constant-pump reports mark the
correctly-withheld and missed categories as not applicable, since an
always-open pump never withholds by decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dispersal import DispersalEvent, DispersalMode
from .errors import DataIntegrityError, EmptyLogError, InvalidParameterError
from .world import SubstrateClass


@dataclass(frozen=True, slots=True)
class MetricsReport:
    mode: DispersalMode
    suitable_pct: float
    unsuitable_pct: float | None
    missed_event_pct: float | None
    wasted_larvae_pct: float
    area_covered: float
    ground_truth_suitable_pct: float
    bladder_exhausted: bool = False
    post_exhaustion_cells: int = 0

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "suitable_pct": self.suitable_pct,
            "unsuitable_pct": self.unsuitable_pct,
            "missed_event_pct": self.missed_event_pct,
            "wasted_larvae_pct": self.wasted_larvae_pct,
            "area_covered_m2": self.area_covered,
            "ground_truth_suitable_pct": self.ground_truth_suitable_pct,
            "bladder_exhausted": self.bladder_exhausted,
            "post_exhaustion_cells": self.post_exhaustion_cells,
        }


def _last_decision_cells(
    events: Iterable[DispersalEvent], origin: tuple[float, float]
) -> dict[tuple[int, int], DispersalEvent]:
    cells: dict[tuple[int, int], DispersalEvent] = {}
    for event in events:
        if event.ground_truth is None or event.predicted is None:
            raise DataIntegrityError("event at t=%g lacks ground truth" % event.timestamp)
        if event.cell_area <= 0:
            raise DataIntegrityError("event at t=%g has no cell area" % event.timestamp)
        size = math.sqrt(event.cell_area)
        ix = math.floor((event.position[0] - origin[0]) / size)
        iy = math.floor((event.position[1] - origin[1]) / size)
        cells[(ix, iy)] = event
    return cells


def compute_report(
    events: Sequence[DispersalEvent],
    mode: DispersalMode,
    origin: tuple[float, float] = (0.0, 0.0),
    exhausted_at: float | None = None,
) -> MetricsReport:
    """Score a mission log into the four area categories.

    ``exhausted_at`` is the mission time the bladder ran dry, if it did;
    cells surveyed after that instant score as missed events when their
    truth is suitable (the pump could no longer act) and are counted
    separately so exhausted missions are recognizable.
    """
    if not events:
        raise EmptyLogError("no dispersal events to score")

    cells = _last_decision_cells(events, origin)
    suitable = unsuitable = missed = wasted = 0.0
    truth_suitable = 0.0
    total = 0.0
    post_exhaustion = 0
    for event in cells.values():
        area = event.cell_area
        total += area
        released = event.released_volume > 0.0
        if event.ground_truth is SubstrateClass.SUITABLE:
            truth_suitable += area
            if released:
                suitable += area
            else:
                missed += area
        else:
            if released:
                wasted += area
            else:
                unsuitable += area
        if exhausted_at is not None and event.timestamp > exhausted_at:
            post_exhaustion += 1

    constant = mode is DispersalMode.CONSTANT_PUMP
    return MetricsReport(
        mode=mode,
        suitable_pct=suitable * 100.0 / total,
        unsuitable_pct=None if constant else unsuitable * 100.0 / total,
        missed_event_pct=None if constant else missed * 100.0 / total,
        wasted_larvae_pct=wasted * 100.0 / total,
        area_covered=total,
        ground_truth_suitable_pct=truth_suitable * 100.0 / total,
        bladder_exhausted=exhausted_at is not None,
        post_exhaustion_cells=post_exhaustion,
    )


def coverage_area(
    events: Sequence[DispersalEvent], origin: tuple[float, float] = (0.0, 0.0)
) -> float:
    """Total surveyed area: distinct cells touched by the log, revisits
    counted once."""
    if not events:
        return 0.0
    cells = _last_decision_cells(events, origin)
    return sum(event.cell_area for event in cells.values())


def coverage_ratio(asv_area: float, manual_area: float) -> float:
    """Area multiple achieved over a manual-deployment baseline."""
    if manual_area <= 0:
        raise InvalidParameterError("manual_area must be positive")
    if asv_area < 0:
        raise InvalidParameterError("asv_area must be >= 0")
    return asv_area / manual_area


def decision_overlay(
    events: Sequence[DispersalEvent], origin: tuple[float, float] = (0.0, 0.0)
) -> list[dict]:
    """Per-cell decision dots for map rendering: cell-center position,
    whether larvae were released there, and the ground truth."""
    cells = _last_decision_cells(events, origin)
    overlay = []
    for (ix, iy), event in sorted(cells.items()):
        size = math.sqrt(event.cell_area)
        overlay.append(
            {
                "x": origin[0] + (ix + 0.5) * size,
                "y": origin[1] + (iy + 0.5) * size,
                "released": event.released_volume > 0.0,
                "truth": event.ground_truth.value,
            }
        )
    return overlay


_MODE_LABELS = {
    DispersalMode.CLASSIFIER_GATED: "Classifier gated",
    DispersalMode.CONSTANT_PUMP: "Constant pump",
}

_COLUMNS = ("Suitable", "Unsuitable", "Missed Event", "Wasted Larvae")


def _fmt_pct(value: float | None) -> str:
    return "N/A" if value is None else "%.2f" % value


def format_table(reports: Sequence[MetricsReport]) -> str:
    """Fixed-width percentage table, one row per report, for visual
    comparison of modes. Values carry two decimals; absent categories
    show N/A."""
    header = "%-18s" % "Mode" + "".join("%18s" % ("%s (%%)" % c) for c in _COLUMNS)
    header += "%14s" % "Area (m^2)"
    lines = [header, "-" * len(header)]
    for report in reports:
        row = "%-18s" % _MODE_LABELS[report.mode]
        row += "%18s" % _fmt_pct(report.suitable_pct)
        row += "%18s" % _fmt_pct(report.unsuitable_pct)
        row += "%18s" % _fmt_pct(report.missed_event_pct)
        row += "%18s" % _fmt_pct(report.wasted_larvae_pct)
        row += "%14s" % ("%.1f" % report.area_covered)
        if report.bladder_exhausted:
            row += "  [bladder exhausted: %d cells after]" % report.post_exhaustion_cells
        lines.append(row)
    return "\n".join(lines)
