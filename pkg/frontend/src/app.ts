// Console entry point: wires the feed socket, the draft mission editor,
// and the canvas renderer together. All view state lives in the pure
// reducer (view.ts); this module only does DOM and network plumbing.

import {
  addWaypoint,
  clearWaypoints,
  dispersalModeCommand,
  drivesReversed,
  emptyDraft,
  missionUploadCommand,
  payloadCommand,
  returnHomeCommand,
  startCommand,
  stopCommand,
  undoWaypoint,
} from "./mission.js";
import type { ConsoleRequest, DispersalMode, PayloadKind } from "./types.js";
import {
  applyFeedMessage,
  emptyView,
  gaugePercent,
  panelLayout,
  selectVehicle,
} from "./view.js";

// ==============================
// DOM lookup
// ==============================

function byId<T extends HTMLElement>(id: string): T {
  const element = document.getElementById(id) as T | null;
  if (element === null) {
    throw new Error(`missing required element #${id}`);
  }
  return element;
}

const canvas = byId<HTMLCanvasElement>("view");
const panelsBox = byId<HTMLDivElement>("panels");
const bannerBox = byId<HTMLDivElement>("banner");
const statusBox = byId<HTMLSpanElement>("status");
const payloadSelect = byId<HTMLSelectElement>("payload");
const dispersalSelect = byId<HTMLSelectElement>("dispersal");
const reversedBadge = byId<HTMLSpanElement>("reversed");
const uploadButton = byId<HTMLButtonElement>("upload");
const undoButton = byId<HTMLButtonElement>("undo");
const clearButton = byId<HTMLButtonElement>("clear");
const startButton = byId<HTMLButtonElement>("start");
const stopButton = byId<HTMLButtonElement>("stop");
const homeButton = byId<HTMLButtonElement>("home");

const context = canvas.getContext("2d");
if (context === null) {
  throw new Error("canvas 2d context unavailable");
}
const ctx = context;

// ==============================
// State
// ==============================

const view = emptyView();
const draft = emptyDraft();
let connected = false;
let dirty = true;

// World window in meters, grown to cover everything seen so far.
const bounds = { minX: 0, minY: 0, maxX: 100, maxY: 80 };
const PADDING = 24; // canvas pixels around the world window

function growBounds(x: number, y: number): void {
  bounds.minX = Math.min(bounds.minX, x);
  bounds.minY = Math.min(bounds.minY, y);
  bounds.maxX = Math.max(bounds.maxX, x);
  bounds.maxY = Math.max(bounds.maxY, y);
}

function worldScale(): number {
  const spanX = bounds.maxX - bounds.minX;
  const spanY = bounds.maxY - bounds.minY;
  const width = canvas.clientWidth - 2 * PADDING;
  const height = canvas.clientHeight - 2 * PADDING;
  return Math.min(width / spanX, height / spanY);
}

function worldToCanvas(x: number, y: number): [number, number] {
  const scale = worldScale();
  // World y grows north, canvas y grows down.
  return [
    PADDING + (x - bounds.minX) * scale,
    canvas.clientHeight - PADDING - (y - bounds.minY) * scale,
  ];
}

function canvasToWorld(px: number, py: number): [number, number] {
  const scale = worldScale();
  return [
    bounds.minX + (px - PADDING) / scale,
    bounds.minY + (canvas.clientHeight - PADDING - py) / scale,
  ];
}

// ==============================
// Rendering
// ==============================

function resizeCanvas(): void {
  const ratio = window.devicePixelRatio || 1;
  canvas.width = Math.round(canvas.clientWidth * ratio);
  canvas.height = Math.round(canvas.clientHeight * ratio);
  ctx.setTransform(ratio, 0, 0, ratio, 0, 0);
  dirty = true;
}

function drawDots(): void {
  for (const dot of view.dots) {
    const [px, py] = worldToCanvas(dot.x, dot.y);
    ctx.fillStyle = dot.color === "green" ? "#2e9e4f" : "#c43c3c";
    ctx.fillRect(px - 1.5, py - 1.5, 3, 3);
  }
}

function drawDraft(): void {
  if (draft.waypoints.length === 0) return;
  ctx.strokeStyle = "#e0a93c";
  ctx.fillStyle = "#e0a93c";
  ctx.lineWidth = 1;
  ctx.beginPath();
  draft.waypoints.forEach(([x, y], index) => {
    const [px, py] = worldToCanvas(x, y);
    if (index === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
  draft.waypoints.forEach(([x, y], index) => {
    const [px, py] = worldToCanvas(x, y);
    ctx.beginPath();
    ctx.arc(px, py, 4, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(String(index + 1), px + 6, py - 6);
  });
}

function drawVehicles(): void {
  for (const panel of view.vehicles.values()) {
    if (panel.pose === null) continue;
    const [px, py] = worldToCanvas(panel.pose.x, panel.pose.y);
    ctx.save();
    ctx.translate(px, py);
    // Heading is measured from east, counterclockwise; canvas y is down.
    ctx.rotate(-panel.pose.heading);
    ctx.fillStyle = panel.vehicleId === view.selected ? "#3c78c4" : "#7f8ea3";
    ctx.beginPath();
    ctx.moveTo(8, 0);
    ctx.lineTo(-5, 4.5);
    ctx.lineTo(-5, -4.5);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
    ctx.fillStyle = "#333";
    ctx.fillText(panel.vehicleId, px + 10, py + 4);
  }
}

function renderCanvas(): void {
  ctx.clearRect(0, 0, canvas.clientWidth, canvas.clientHeight);
  ctx.font = "11px sans-serif";
  drawDots();
  drawDraft();
  drawVehicles();
}

function panelHtml(vehicleId: string): string {
  const panel = view.vehicles.get(vehicleId);
  if (panel === undefined) return "";
  const stale = panel.stale ? '<span class="stale">stale</span>' : "";
  const pose =
    panel.pose === null
      ? "no telemetry yet"
      : `x ${panel.pose.x.toFixed(1)} m, y ${panel.pose.y.toFixed(1)} m`;
  const progress = panel.missionComplete
    ? "mission complete"
    : `waypoint ${panel.activeWaypoint + 1}`;
  return `
    <div class="panel-title">${vehicleId} ${stale}</div>
    <div class="panel-line">${pose}</div>
    <div class="panel-line">battery ${(panel.battery * 100).toFixed(0)}% &middot; ${progress}</div>
    <div class="gauge"><div class="gauge-fill" style="width:${gaugePercent(panel.gauge)}%"></div></div>
  `;
}

function renderPanels(): void {
  const ids = Array.from(view.vehicles.keys());
  const rects = panelLayout(ids.length, panelsBox.clientWidth, panelsBox.clientHeight);
  panelsBox.replaceChildren();
  ids.forEach((vehicleId, index) => {
    const rect = rects[index];
    const element = document.createElement("div");
    element.className = "panel" + (vehicleId === view.selected ? " selected" : "");
    element.style.top = `${rect.y}px`;
    element.style.height = `${rect.height}px`;
    element.innerHTML = panelHtml(vehicleId);
    element.addEventListener("click", () => {
      selectVehicle(view, vehicleId);
      dirty = true;
    });
    panelsBox.appendChild(element);
  });
}

function renderChrome(): void {
  bannerBox.textContent = view.banner ?? "";
  bannerBox.style.display = view.banner === null ? "none" : "block";
  statusBox.textContent = `${connected ? "connected" : "disconnected"} | ${
    view.accepted
  } frames, ${view.dropped} dropped, ${view.malformed} malformed`;
}

function frame(): void {
  if (dirty) {
    dirty = false;
    renderCanvas();
    renderPanels();
    renderChrome();
  }
  window.requestAnimationFrame(frame);
}

// ==============================
// Feed socket
// ==============================

let socket: WebSocket | null = null;

function send(request: ConsoleRequest): void {
  if (socket === null || socket.readyState !== WebSocket.OPEN) {
    view.banner = "not connected to the fleet service";
    dirty = true;
    return;
  }
  socket.send(JSON.stringify(request));
}

function connect(): void {
  socket = new WebSocket(`ws://${location.host}/`);
  socket.onopen = () => {
    connected = true;
    dirty = true;
  };
  socket.onmessage = (event: MessageEvent<string>) => {
    let parsed: unknown;
    try {
      parsed = JSON.parse(event.data);
    } catch {
      console.warn("undecodable feed frame", event.data);
      return;
    }
    const outcome = applyFeedMessage(view, parsed);
    if (outcome === "malformed") {
      console.warn("malformed feed frame", parsed);
    }
    if (view.selected === null && view.vehicles.size > 0) {
      selectVehicle(view, Array.from(view.vehicles.keys())[0]);
    }
    for (const panel of view.vehicles.values()) {
      if (panel.pose !== null) growBounds(panel.pose.x, panel.pose.y);
    }
    dirty = true;
  };
  socket.onclose = () => {
    connected = false;
    dirty = true;
    window.setTimeout(connect, 2000);
  };
}

// ==============================
// Controls
// ==============================

function requireSelected(): string | null {
  if (view.selected === null) {
    view.banner = "select a vehicle first";
    dirty = true;
    return null;
  }
  return view.selected;
}

canvas.addEventListener("click", (event: MouseEvent) => {
  const box = canvas.getBoundingClientRect();
  const [x, y] = canvasToWorld(event.clientX - box.left, event.clientY - box.top);
  addWaypoint(draft, x, y);
  dirty = true;
});

uploadButton.addEventListener("click", () => {
  const vehicleId = requireSelected();
  if (vehicleId === null) return;
  try {
    send(missionUploadCommand(vehicleId, draft));
  } catch (error) {
    view.banner = error instanceof Error ? error.message : String(error);
    dirty = true;
  }
});

undoButton.addEventListener("click", () => {
  undoWaypoint(draft);
  dirty = true;
});

clearButton.addEventListener("click", () => {
  clearWaypoints(draft);
  dirty = true;
});

startButton.addEventListener("click", () => {
  const vehicleId = requireSelected();
  if (vehicleId !== null) send(startCommand(vehicleId));
});

stopButton.addEventListener("click", () => {
  const vehicleId = requireSelected();
  if (vehicleId !== null) send(stopCommand(vehicleId));
});

homeButton.addEventListener("click", () => {
  const vehicleId = requireSelected();
  if (vehicleId !== null) send(returnHomeCommand(vehicleId));
});

payloadSelect.addEventListener("change", () => {
  const kind = payloadSelect.value as PayloadKind;
  reversedBadge.style.display = drivesReversed(kind) ? "inline" : "none";
  const vehicleId = requireSelected();
  if (vehicleId !== null) send(payloadCommand(vehicleId, kind));
});

dispersalSelect.addEventListener("change", () => {
  const vehicleId = requireSelected();
  if (vehicleId === null) return;
  send(dispersalModeCommand(vehicleId, dispersalSelect.value as DispersalMode));
});

// ==============================
// Boot
// ==============================

window.addEventListener("resize", resizeCanvas);
resizeCanvas();
connect();
window.requestAnimationFrame(frame);
