// Wire message schema shared with the positioning server. One JSON object
// per WebSocket frame; numeric fields are plain JSON numbers. Unknown keys
// are ignored on both sides.

export type MessageKind =
  | "hello"
  | "cmd"
  | "pose"
  | "goal"
  | "track"
  | "ack"
  | "error";

export interface HelloMessage {
  kind: "hello";
  seq: number;
  // extension keys the server attaches so a fresh client can set up its
  // world mapping
  arena_width?: number;
  arena_height?: number;
  camera_scale?: number;
  image_width?: number;
  image_height?: number;
}

export interface PoseMessage {
  kind: "pose";
  seq: number;
  x: number;
  y: number;
  theta: number;
  t: number;
}

export interface GoalMessage {
  kind: "goal";
  seq: number;
  x: number;
  y: number;
}

export interface TrackMessage {
  kind: "track";
  seq: number;
  points: number[]; // flat [x0, y0, x1, y1, ...]
}

export interface AckMessage {
  kind: "ack";
  seq: number;
  ref_seq: number;
  detail?: string;
}

export interface ErrorMessage {
  kind: "error";
  seq: number;
  ref_seq: number;
  detail?: string;
}

export type ServerMessage =
  | HelloMessage
  | PoseMessage
  | GoalMessage
  | TrackMessage
  | AckMessage
  | ErrorMessage;

// The console only ever sends these; motor commands stay server-side.
export type ClientMessage = HelloMessage | GoalMessage | TrackMessage;

const KNOWN_KINDS: ReadonlySet<string> = new Set([
  "hello",
  "cmd",
  "pose",
  "goal",
  "track",
  "ack",
  "error",
]);

export function parseMessage(raw: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const msg = obj as Record<string, unknown>;
  if (typeof msg.kind !== "string" || !KNOWN_KINDS.has(msg.kind)) return null;
  if (typeof msg.seq !== "number") return null;
  switch (msg.kind) {
    case "pose":
      if (
        typeof msg.x !== "number" ||
        typeof msg.y !== "number" ||
        typeof msg.theta !== "number" ||
        typeof msg.t !== "number"
      )
        return null;
      break;
    case "goal":
      if (typeof msg.x !== "number" || typeof msg.y !== "number") return null;
      break;
    case "track":
      if (!Array.isArray(msg.points) || msg.points.length % 2 !== 0) return null;
      break;
    case "ack":
    case "error":
      if (typeof msg.ref_seq !== "number") return null;
      break;
  }
  return msg as unknown as ServerMessage;
}

export function encodeMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

export function goalMessage(seq: number, x: number, y: number): GoalMessage {
  return { kind: "goal", seq, x, y };
}

export function trackMessage(seq: number, points: number[]): TrackMessage {
  return { kind: "track", seq, points };
}

export function helloMessage(seq: number): HelloMessage {
  return { kind: "hello", seq };
}
