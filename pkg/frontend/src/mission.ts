// Draft mission editing and command construction. Drafts are validated
// here, client-side, against the same invariants the fleet service
// enforces, so a bad mission never leaves the browser.

import type {
  ConsoleCommand,
  DispersalMode,
  MissionMode,
  PayloadKind,
  PayloadSpec,
} from "./types.js";

const DEFAULT_BLADDER_CAPACITY = 100.0; // liters
const DEFAULT_CAMERA_FOOTPRINT = 3.0; // meters

export interface DraftMission {
  waypoints: [number, number][]; // world meters, in visit order
  arrivalRadius: number;
  mode: MissionMode;
}

export function emptyDraft(): DraftMission {
  return { waypoints: [], arrivalRadius: 1.0, mode: "transect" };
}

/** Append a waypoint at a world position (map click). */
export function addWaypoint(draft: DraftMission, x: number, y: number): void {
  draft.waypoints.push([x, y]);
}

/** Remove the most recent waypoint. Returns false when already empty. */
export function undoWaypoint(draft: DraftMission): boolean {
  return draft.waypoints.pop() !== undefined;
}

export function clearWaypoints(draft: DraftMission): void {
  draft.waypoints.length = 0;
}

/**
 * Validate a draft against the mission invariants. Returns one message
 * per problem; an empty list means the draft can be uploaded.
 */
export function draftProblems(draft: DraftMission): string[] {
  const problems: string[] = [];
  if (draft.waypoints.length === 0) {
    problems.push("mission needs at least one waypoint");
  }
  draft.waypoints.forEach(([x, y], index) => {
    if (!Number.isFinite(x) || !Number.isFinite(y)) {
      problems.push(`waypoint ${index} has a non-finite coordinate`);
    }
  });
  if (!(draft.arrivalRadius > 0)) {
    problems.push("arrival_radius must be positive");
  }
  return problems;
}

/**
 * Build the upload command for a validated draft.
 *
 * @throws Error listing the validation problems when the draft is not
 *   uploadable; callers surface the message in the banner.
 */
export function missionUploadCommand(
  vehicleId: string,
  draft: DraftMission,
): ConsoleCommand {
  const problems = draftProblems(draft);
  if (problems.length > 0) {
    throw new Error(problems.join("; "));
  }
  return {
    action: "command",
    vehicle_id: vehicleId,
    command: "upload_mission",
    mission: {
      waypoints: draft.waypoints.map(([x, y]) => [x, y]),
      arrival_radius: draft.arrivalRadius,
      mode: draft.mode,
    },
  };
}

/** Payload selection, with the rig-appropriate capacity defaults. */
export function payloadCommand(vehicleId: string, kind: PayloadKind): ConsoleCommand {
  const spec: PayloadSpec = {
    kind,
    bladder_capacity: kind === "dispersal" ? DEFAULT_BLADDER_CAPACITY : 0.0,
    camera_footprint: kind === "monitoring" ? DEFAULT_CAMERA_FOOTPRINT : 0.0,
  };
  return { action: "command", vehicle_id: vehicleId, command: "set_payload", payload: spec };
}

export function dispersalModeCommand(
  vehicleId: string,
  mode: DispersalMode,
): ConsoleCommand {
  return {
    action: "command",
    vehicle_id: vehicleId,
    command: "set_dispersal_mode",
    dispersal_mode: mode,
  };
}

export function startCommand(vehicleId: string): ConsoleCommand {
  return { action: "command", vehicle_id: vehicleId, command: "start" };
}

export function stopCommand(vehicleId: string): ConsoleCommand {
  return { action: "command", vehicle_id: vehicleId, command: "stop" };
}

export function returnHomeCommand(vehicleId: string): ConsoleCommand {
  return { action: "command", vehicle_id: vehicleId, command: "return_home" };
}

/** The collection rig mounts aft, so vehicles carrying it drive
 * stern-first; the console flags this next to the payload selector. */
export function drivesReversed(kind: PayloadKind): boolean {
  return kind === "collection";
}
