// Message shapes for the fleetlink console channel. Field names and
// casing follow the wire format, so parsed JSON can be used directly.

export type SubstrateDecision = "suitable" | "unsuitable";

export type DispersalMode = "classifier_gated" | "constant_pump";

export type MissionMode = "transect" | "coverage" | "station";

export type PayloadKind = "collection" | "dispersal" | "monitoring";

export type CommandName =
  | "upload_mission"
  | "set_payload"
  | "set_dispersal_mode"
  | "start"
  | "stop"
  | "return_home";

export interface Pose {
  x: number;
  y: number;
  heading: number;
}

/** Classifier verdict taken during the frame's tick; null when the
 * vehicle was off the mapped area and no decision was made. */
export interface DecisionReport {
  x: number;
  y: number;
  predicted: SubstrateDecision;
}

export interface MissionProgress {
  active_index: number;
  complete: boolean;
}

export interface TelemetryFeedMessage {
  type: "telemetry";
  vehicle_id: string;
  sequence: number;
  timestamp: number;
  pose: Pose;
  battery: number; // fraction in [0, 1]
  gauge: number; // bladder fill fraction in [0, 1]
  last_decision: DecisionReport | null;
  mission_progress: MissionProgress;
}

export interface RosterEntry {
  vehicle_id: string;
  stale: boolean;
  last_seen: number;
  last_sequence: number;
}

export interface RosterFeedMessage {
  type: "roster";
  vehicles: RosterEntry[];
}

export interface AckFeedMessage {
  type: "ack";
  vehicle_id: string;
  command: CommandName;
}

export interface ErrorFeedMessage {
  type: "error";
  message: string;
  vehicle_id?: string;
}

export type FeedMessage =
  | TelemetryFeedMessage
  | RosterFeedMessage
  | AckFeedMessage
  | ErrorFeedMessage;

// ---- console -> service ------------------------------------------------

export interface MissionPayload {
  waypoints: [number, number][]; // world meters, visited in order
  arrival_radius: number;
  mode: MissionMode;
}

export interface PayloadSpec {
  kind: PayloadKind;
  bladder_capacity: number;
  camera_footprint: number;
}

export interface ConsoleCommand {
  action: "command";
  vehicle_id: string;
  command: CommandName;
  mission?: MissionPayload;
  payload?: PayloadSpec;
  dispersal_mode?: DispersalMode;
}

export interface RosterRequest {
  action: "roster";
}

export type ConsoleRequest = ConsoleCommand | RosterRequest;
