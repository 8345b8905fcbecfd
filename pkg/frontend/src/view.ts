// Console view state and the reducer that folds feed messages into it.
// The view is a pure function of the ordered, deduplicated feed: replaying
// the same message sequence from an empty view always lands on the same
// final state. Everything here is DOM-free so it can run under a plain
// test runner.

import type {
  AckFeedMessage,
  DecisionReport,
  ErrorFeedMessage,
  MissionProgress,
  Pose,
  RosterEntry,
  RosterFeedMessage,
  SubstrateDecision,
  TelemetryFeedMessage,
} from "./types.js";

export type DotColor = "green" | "red";

/** One classifier decision rendered along the trajectory. */
export interface TrailDot {
  x: number;
  y: number;
  color: DotColor;
}

/** Live state for a single vehicle. Pose is null until the first
 * telemetry frame arrives (roster entries alone carry no pose). */
export interface VehiclePanel {
  vehicleId: string;
  sequence: number;
  timestamp: number;
  pose: Pose | null;
  battery: number;
  gauge: number;
  activeWaypoint: number;
  missionComplete: boolean;
  stale: boolean;
}

export interface ConsoleView {
  vehicles: Map<string, VehiclePanel>; // insertion order fixes panel order
  selected: string | null;
  dots: TrailDot[];
  banner: string | null;
  accepted: number;
  dropped: number;
  malformed: number;
}

export type FeedOutcome = "applied" | "dropped" | "malformed";

export function emptyView(): ConsoleView {
  return {
    vehicles: new Map(),
    selected: null,
    dots: [],
    banner: null,
    accepted: 0,
    dropped: 0,
    malformed: 0,
  };
}

// ---- frame validation ----------------------------------------------------

function isFiniteNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

function isPose(value: unknown): value is Pose {
  if (typeof value !== "object" || value === null) return false;
  const pose = value as Record<string, unknown>;
  return (
    isFiniteNumber(pose.x) && isFiniteNumber(pose.y) && isFiniteNumber(pose.heading)
  );
}

function isDecision(value: unknown): value is DecisionReport {
  if (typeof value !== "object" || value === null) return false;
  const decision = value as Record<string, unknown>;
  return (
    isFiniteNumber(decision.x) &&
    isFiniteNumber(decision.y) &&
    (decision.predicted === "suitable" || decision.predicted === "unsuitable")
  );
}

function isProgress(value: unknown): value is MissionProgress {
  if (typeof value !== "object" || value === null) return false;
  const progress = value as Record<string, unknown>;
  return (
    isFiniteNumber(progress.active_index) && typeof progress.complete === "boolean"
  );
}

function isTelemetry(value: Record<string, unknown>): value is Record<string, unknown> & TelemetryFeedMessage {
  return (
    typeof value.vehicle_id === "string" &&
    value.vehicle_id.length > 0 &&
    isFiniteNumber(value.sequence) &&
    isFiniteNumber(value.timestamp) &&
    isPose(value.pose) &&
    isFiniteNumber(value.battery) &&
    isFiniteNumber(value.gauge) &&
    (value.last_decision === null || isDecision(value.last_decision)) &&
    isProgress(value.mission_progress)
  );
}

function isRoster(value: Record<string, unknown>): value is Record<string, unknown> & RosterFeedMessage {
  if (!Array.isArray(value.vehicles)) return false;
  return value.vehicles.every(
    (entry: unknown) =>
      typeof entry === "object" &&
      entry !== null &&
      typeof (entry as RosterEntry).vehicle_id === "string" &&
      typeof (entry as RosterEntry).stale === "boolean",
  );
}

// ---- reducer ---------------------------------------------------------------

function dotColor(predicted: SubstrateDecision): DotColor {
  return predicted === "suitable" ? "green" : "red";
}

function blankPanel(vehicleId: string): VehiclePanel {
  return {
    vehicleId,
    sequence: -1,
    timestamp: 0,
    pose: null,
    battery: 0,
    gauge: 0,
    activeWaypoint: 0,
    missionComplete: false,
    stale: false,
  };
}

function applyTelemetry(view: ConsoleView, frame: TelemetryFeedMessage): FeedOutcome {
  const known = view.vehicles.get(frame.vehicle_id);
  if (known !== undefined && frame.sequence <= known.sequence) {
    view.dropped += 1;
    return "dropped";
  }
  const panel = known ?? blankPanel(frame.vehicle_id);
  panel.sequence = frame.sequence;
  panel.timestamp = frame.timestamp;
  panel.pose = frame.pose;
  panel.battery = frame.battery;
  panel.gauge = frame.gauge;
  panel.activeWaypoint = frame.mission_progress.active_index;
  panel.missionComplete = frame.mission_progress.complete;
  view.vehicles.set(frame.vehicle_id, panel);
  if (frame.last_decision !== null) {
    view.dots.push({
      x: frame.last_decision.x,
      y: frame.last_decision.y,
      color: dotColor(frame.last_decision.predicted),
    });
  }
  view.accepted += 1;
  return "applied";
}

function applyRoster(view: ConsoleView, roster: RosterFeedMessage): FeedOutcome {
  for (const entry of roster.vehicles) {
    const panel = view.vehicles.get(entry.vehicle_id) ?? blankPanel(entry.vehicle_id);
    panel.stale = entry.stale;
    view.vehicles.set(entry.vehicle_id, panel);
  }
  view.accepted += 1;
  return "applied";
}

function applyAck(view: ConsoleView, _ack: AckFeedMessage): FeedOutcome {
  view.banner = null;
  view.accepted += 1;
  return "applied";
}

function applyError(view: ConsoleView, error: ErrorFeedMessage): FeedOutcome {
  const prefix = typeof error.vehicle_id === "string" ? error.vehicle_id + ": " : "";
  view.banner = prefix + error.message;
  view.accepted += 1;
  return "applied";
}

/**
 * Fold one raw feed message into the view.
 *
 * Telemetry whose sequence does not advance the per-vehicle counter is
 * dropped; anything that fails shape validation is counted as malformed
 * and leaves the view untouched. The caller decides whether to log.
 */
export function applyFeedMessage(view: ConsoleView, raw: unknown): FeedOutcome {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    view.malformed += 1;
    return "malformed";
  }
  const message = raw as Record<string, unknown>;
  switch (message.type) {
    case "telemetry":
      if (!isTelemetry(message)) break;
      return applyTelemetry(view, message);
    case "roster":
      if (!isRoster(message)) break;
      return applyRoster(view, message);
    case "ack":
      if (typeof message.vehicle_id !== "string" || typeof message.command !== "string") break;
      return applyAck(view, message as unknown as AckFeedMessage);
    case "error":
      if (typeof message.message !== "string") break;
      return applyError(view, message as unknown as ErrorFeedMessage);
  }
  view.malformed += 1;
  return "malformed";
}

/** Fold a decoded message list into a fresh view. */
export function replayFeed(messages: unknown[]): ConsoleView {
  const view = emptyView();
  for (const message of messages) {
    applyFeedMessage(view, message);
  }
  return view;
}

/** Mark a vehicle as selected; pass null to clear. Unknown ids are
 * ignored so a click race with a roster update cannot corrupt state. */
export function selectVehicle(view: ConsoleView, vehicleId: string | null): void {
  if (vehicleId === null || view.vehicles.has(vehicleId)) {
    view.selected = vehicleId;
  }
}

/** Gauge bar fill in percent, clamped to [0, 100]. */
export function gaugePercent(fraction: number): number {
  return Math.min(100, Math.max(0, fraction * 100));
}

// ---- layout ----------------------------------------------------------------

export interface PanelRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

/**
 * Stack vehicle panels in a single column inside the given box. Rows
 * never overlap for any count, which keeps the seven-vehicle fleet
 * readable without scrolling.
 */
export function panelLayout(
  count: number,
  width: number,
  height: number,
  gap = 8,
): PanelRect[] {
  if (count <= 0) return [];
  const rowHeight = Math.max(0, (height - gap * (count - 1)) / count);
  const rects: PanelRect[] = [];
  for (let i = 0; i < count; i += 1) {
    rects.push({ x: 0, y: i * (rowHeight + gap), width, height: rowHeight });
  }
  return rects;
}

// ---- comparison helpers ------------------------------------------------------

/** Plain-object copy of the view for equality checks and debugging.
 * Vehicle entries keep their insertion order. */
export function viewSnapshot(view: ConsoleView): Record<string, unknown> {
  return {
    vehicles: Array.from(view.vehicles.values(), (panel) => ({ ...panel })),
    selected: view.selected,
    dots: view.dots.map((dot) => ({ ...dot })),
    banner: view.banner,
    accepted: view.accepted,
    dropped: view.dropped,
    malformed: view.malformed,
  };
}
