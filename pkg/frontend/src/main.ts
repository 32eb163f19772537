// Console bootstrap: wires the socket client, UI state, and canvas
// together. Everything interesting lives in the imported modules.

import { BridgeClient } from "./client.js";
import type { ArenaMapping } from "./mapping.js";
import { fitArena } from "./mapping.js";
import { renderArena } from "./render.js";
import { trackFileText } from "./resample.js";
import {
  applyMessage,
  clickToGoal,
  initialState,
  setConnection,
  setMode,
  sketchFinish,
  sketchMove,
  sketchStart,
  type Mode,
  type UiState,
} from "./state.js";

const canvas = document.getElementById("arena") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const modeButtons = Array.from(
  document.querySelectorAll<HTMLButtonElement>("button[data-mode]")
);

const params = new URLSearchParams(window.location.search);
const bridgeUrl =
  params.get("bridge") ?? `ws://${window.location.hostname || "127.0.0.1"}:7012/ws`;

let state: UiState = initialState();
let mapping: ArenaMapping = fitArena(4.0, 3.0, canvas.width, canvas.height);
let flashTimer: number | undefined;

const client = new BridgeClient(bridgeUrl, {
  onOpen: () => {
    state = setConnection(state, "open");
    client.send({ kind: "hello", seq: client.nextSeq() });
  },
  onClose: () => {
    state = setConnection(state, "closed");
  },
  onMessage: (msg) => {
    if (msg.kind === "hello" && msg.arena_width && msg.arena_height) {
      mapping = fitArena(msg.arena_width, msg.arena_height, canvas.width, canvas.height);
    }
    state = applyMessage(state, msg, performance.now());
  },
});
client.connect();

function flash(): void {
  if (!state.flash) return;
  window.clearTimeout(flashTimer);
  flashTimer = window.setTimeout(() => {
    state = { ...state, flash: null };
  }, 1500);
}

function canvasPoint(event: MouseEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return { x: event.clientX - rect.left, y: event.clientY - rect.top };
}

canvas.addEventListener("click", (event) => {
  if (state.mode !== "goal") return;
  const result = clickToGoal(state, mapping, canvasPoint(event), client.nextSeq());
  state = result.state;
  if (result.message) client.send(result.message);
  flash();
});

canvas.addEventListener("mousedown", (event) => {
  state = sketchStart(state, canvasPoint(event));
});
canvas.addEventListener("mousemove", (event) => {
  if (event.buttons & 1) state = sketchMove(state, canvasPoint(event));
});
canvas.addEventListener("mouseup", () => {
  if (state.mode !== "track" || state.sketch.length === 0) return;
  const result = sketchFinish(state, mapping, client.nextSeq());
  state = result.state;
  if (result.message) client.send(result.message);
  flash();
});

for (const button of modeButtons) {
  button.addEventListener("click", () => {
    state = setMode(state, button.dataset.mode as Mode);
    for (const other of modeButtons) {
      other.classList.toggle("active", other === button);
    }
  });
}

document.getElementById("save-track")?.addEventListener("click", () => {
  if (!state.activeTrack || state.activeTrack.length < 4) {
    state = { ...state, flash: "no active track" };
    flash();
    return;
  }
  const blob = new Blob([trackFileText(state.activeTrack)], { type: "text/plain" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = "sketch.track";
  link.click();
  URL.revokeObjectURL(link.href);
});

function frame(): void {
  renderArena(ctx, state, mapping, performance.now());
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
