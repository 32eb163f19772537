// Pure console state: everything the renderer needs, updated by socket
// messages and pointer events. No DOM access here so it tests headless.

import type { ArenaMapping, Point } from "./mapping.js";
import { insideArena, screenToWorld } from "./mapping.js";
import type { GoalMessage, ServerMessage, TrackMessage } from "./protocol.js";
import { goalMessage, trackMessage } from "./protocol.js";
import { flatten, resampleUniform } from "./resample.js";

export type Mode = "goal" | "track" | "idle";
export type Connection = "connecting" | "open" | "closed";

export interface TimedPose {
  x: number;
  y: number;
  theta: number;
  t: number; // server (simulation) time, seconds
  receivedAtMs: number; // client wall clock
}

export const STALE_AFTER_MS = 1000;
export const TRAIL_LENGTH = 150;

export interface UiState {
  connection: Connection;
  mode: Mode;
  pose: TimedPose | null;
  goal: Point | null;
  activeTrack: number[] | null; // flat, as echoed by the server
  sketch: Point[]; // screen-space points while drawing
  trail: TimedPose[];
  flash: string | null; // transient user feedback
  lastError: string | null;
}

export function initialState(): UiState {
  return {
    connection: "connecting",
    mode: "idle",
    pose: null,
    goal: null,
    activeTrack: null,
    sketch: [],
    trail: [],
    flash: null,
    lastError: null,
  };
}

export function isStale(state: UiState, nowMs: number): boolean {
  return state.pose === null || nowMs - state.pose.receivedAtMs > STALE_AFTER_MS;
}

export function applyMessage(
  state: UiState,
  msg: ServerMessage,
  nowMs: number
): UiState {
  switch (msg.kind) {
    case "pose": {
      const pose: TimedPose = {
        x: msg.x,
        y: msg.y,
        theta: msg.theta,
        t: msg.t,
        receivedAtMs: nowMs,
      };
      const trail = [...state.trail, pose];
      if (trail.length > TRAIL_LENGTH) trail.splice(0, trail.length - TRAIL_LENGTH);
      return { ...state, pose, trail };
    }
    case "goal":
      return { ...state, goal: { x: msg.x, y: msg.y } };
    case "track":
      return { ...state, activeTrack: [...msg.points] };
    case "error":
      return { ...state, lastError: msg.detail ?? "server error" };
    case "hello":
    case "ack":
      return state;
    default:
      return state;
  }
}

export function setConnection(state: UiState, connection: Connection): UiState {
  return { ...state, connection };
}

export function setMode(state: UiState, mode: Mode): UiState {
  return { ...state, mode, sketch: [] };
}

export interface ClickResult {
  state: UiState;
  message: GoalMessage | null;
}

/**
 * A click in goal mode becomes a goal message after inverting the screen
 * mapping; clicks outside the arena (or while disconnected) only flash.
 */
export function clickToGoal(
  state: UiState,
  mapping: ArenaMapping,
  screenPoint: Point,
  seq: number
): ClickResult {
  if (state.connection !== "open") {
    return { state: { ...state, flash: "not connected" }, message: null };
  }
  if (state.mode !== "goal") {
    return { state, message: null };
  }
  const world = screenToWorld(mapping, screenPoint);
  if (!insideArena(mapping, world)) {
    return { state: { ...state, flash: "outside arena" }, message: null };
  }
  return { state, message: goalMessage(seq, world.x, world.y) };
}

export interface SketchResult {
  state: UiState;
  message: TrackMessage | null;
}

export function sketchStart(state: UiState, screenPoint: Point): UiState {
  if (state.mode !== "track") return state;
  return { ...state, sketch: [screenPoint] };
}

export function sketchMove(state: UiState, screenPoint: Point): UiState {
  if (state.mode !== "track" || state.sketch.length === 0) return state;
  return { ...state, sketch: [...state.sketch, screenPoint] };
}

/**
 * Finish a sketch: map to world meters, resample to uniform spacing, and
 * build the track message. Sketches with fewer than two distinct points
 * are rejected with a flash.
 */
export function sketchFinish(
  state: UiState,
  mapping: ArenaMapping,
  seq: number
): SketchResult {
  const sketch = state.sketch;
  const cleared = { ...state, sketch: [] };
  if (state.connection !== "open") {
    return { state: { ...cleared, flash: "not connected" }, message: null };
  }
  const world = sketch.map((p) => screenToWorld(mapping, p));
  let resampled: Point[];
  try {
    resampled = resampleUniform(world);
  } catch {
    return { state: { ...cleared, flash: "track too short" }, message: null };
  }
  if (!resampled.every((p) => insideArena(mapping, p))) {
    return { state: { ...cleared, flash: "track leaves arena" }, message: null };
  }
  return { state: cleared, message: trackMessage(seq, flatten(resampled)) };
}
