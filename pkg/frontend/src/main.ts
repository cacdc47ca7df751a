/** Browser entry point: wires the DOM to the pure modules.
 *
 * Everything stateful lives in SessionStore and Sender; this file only
 * moves events between the socket, the widgets, and the canvas.
 */
import { commandForKey, KEYMAP } from "./keymap.js";
import { parseServerMsg, VOCABULARY, type Command } from "./protocol.js";
import { renderScene } from "./scene.js";
import { Sender } from "./sender.js";
import { SessionStore, type HistoryEntry } from "./state.js";

// ------------------------------------------------------------------
// DOM references
// ------------------------------------------------------------------
function must<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const canvas = must<HTMLCanvasElement>("scene");
const ctx2d = canvas.getContext("2d");
if (!ctx2d) throw new Error("2D canvas context unavailable");
const ctx = ctx2d;

const urlInput = must<HTMLInputElement>("url");
const connectBtn = must<HTMLButtonElement>("connect");
const connBadge = must<HTMLSpanElement>("conn");
const roleEl = must<HTMLSpanElement>("role");
const sessionModeEl = must<HTMLSpanElement>("session-mode");
const modeBadge = must<HTMLSpanElement>("arb-mode");
const simTimeEl = must<HTMLSpanElement>("sim-time");
const altitudeEl = must<HTMLSpanElement>("altitude");
const rhoEl = must<HTMLSpanElement>("rho");
const crossTrackEl = must<HTMLSpanElement>("xtrack");
const droppedEl = must<HTMLSpanElement>("dropped");
const alphaFill = must<HTMLDivElement>("alpha-fill");
const alphaLabel = must<HTMLSpanElement>("alpha-label");
const errorLine = must<HTMLDivElement>("error-line");
const paletteEl = must<HTMLDivElement>("palette");
const historyEl = must<HTMLUListElement>("history");
const controlsEl = must<HTMLDivElement>("controls");
const startBtn = must<HTMLButtonElement>("ctl-start");
const pauseBtn = must<HTMLButtonElement>("ctl-pause");
const resetBtn = must<HTMLButtonElement>("ctl-reset");
const modeSelect = must<HTMLSelectElement>("ctl-mode");

// ------------------------------------------------------------------
// Session wiring
// ------------------------------------------------------------------
let store = new SessionStore();
const sender = new Sender();
let socket: WebSocket | null = null;

function connect(url: string): void {
  if (socket) {
    socket.onclose = null;
    socket.close();
  }
  store = new SessionStore(); // a reconnect is a brand-new server session
  store.noteReconnecting();
  const ws = new WebSocket(url);
  socket = ws;
  sender.attach(ws);
  ws.onopen = () => {
    store.noteOpen();
    const flushed = sender.flush();
    if (flushed && flushed.payload.type === "command" && flushed.result.ok) {
      store.commandSent(flushed.result.seq, flushed.payload.data.command);
    }
  };
  ws.onmessage = (ev) => {
    const msg = parseServerMsg(String(ev.data));
    if (msg) store.handleServer(msg);
  };
  ws.onclose = () => {
    store.noteClosed();
  };
  ws.onerror = () => {
    store.lastError = `websocket error (${url})`;
  };
}

connectBtn.addEventListener("click", () => connect(urlInput.value.trim()));
urlInput.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") connect(urlInput.value.trim());
  ev.stopPropagation(); // keep palette keys usable while the field has focus
});

function sendCommand(name: Command): void {
  const res = sender.command(name);
  if (res.ok) store.commandSent(res.seq, name);
  else if (res.queued) store.commandQueued(name);
  else store.lastError = `cannot send ${name}: ${res.reason}`;
}

// ------------------------------------------------------------------
// Command palette + keyboard
// ------------------------------------------------------------------
const keyFor = new Map<Command, string>();
for (const [key, cmd] of Object.entries(KEYMAP)) {
  keyFor.set(cmd, key === " " ? "space" : key);
}

for (const name of VOCABULARY) {
  const btn = document.createElement("button");
  btn.className = "cmd";
  const hint = keyFor.get(name);
  btn.innerHTML = hint ? `${name}<kbd>${hint}</kbd>` : name;
  btn.addEventListener("click", () => sendCommand(name));
  paletteEl.appendChild(btn);
}

window.addEventListener("keydown", (ev) => {
  if (ev.target instanceof HTMLInputElement || ev.target instanceof HTMLSelectElement) return;
  const cmd = commandForKey(ev.key);
  if (!cmd) return;
  ev.preventDefault();
  sendCommand(cmd);
});

// ------------------------------------------------------------------
// Control strip (commander only; the server refuses observers anyway)
// ------------------------------------------------------------------
startBtn.addEventListener("click", () => void sender.control("start"));
pauseBtn.addEventListener("click", () => void sender.control("pause"));
resetBtn.addEventListener("click", () => void sender.control("reset"));
modeSelect.addEventListener("change", () => void sender.setMode(modeSelect.value));

// ------------------------------------------------------------------
// Readouts
// ------------------------------------------------------------------
const OUTCOME_MARK: Record<HistoryEntry["outcome"], string> = {
  queued: "…",
  sent: "→",
  dropped: "∅",
  pending: "◌",
  delivered: "✓",
  corrupted: "✗",
  failed: "!",
};

function renderHistory(): void {
  const items = store.history
    .slice()
    .reverse()
    .map((h) => {
      const mark = OUTCOME_MARK[h.outcome];
      const detail =
        h.outcome === "corrupted" && h.delivered
          ? ` → ${h.delivered}`
          : h.note
            ? ` (${h.note})`
            : "";
      return `<li class="h-${h.outcome}"><span class="mark">${mark}</span>${h.intended}${detail}</li>`;
    });
  historyEl.innerHTML = items.join("");
}

function updateReadouts(): void {
  connBadge.textContent = store.connection;
  connBadge.className = `badge conn-${store.connection}`;
  roleEl.textContent = store.role ?? "—";
  sessionModeEl.textContent = store.sessionMode || "—";

  const row = store.latest;
  modeBadge.textContent = row ? row.mode : "—";
  modeBadge.className = row ? `badge arb-${row.mode.toLowerCase()}` : "badge";
  simTimeEl.textContent = row ? `${row.t.toFixed(2)} s` : "—";
  altitudeEl.textContent = row ? `${row.z.toFixed(2)} m` : "—";
  rhoEl.textContent = row ? row.rho.toFixed(2) : "—";
  crossTrackEl.textContent = row ? `${row.e_xt.toFixed(2)} m` : "—";
  droppedEl.textContent = String(store.droppedFrames);

  const alpha = store.alpha;
  alphaFill.style.width = `${(alpha * 100).toFixed(1)}%`;
  alphaLabel.textContent = alpha.toFixed(2);

  errorLine.textContent = store.lastError;
  errorLine.style.display = store.lastError ? "block" : "none";

  const commander = store.role === "commander";
  controlsEl.classList.toggle("disabled", !commander);
  for (const btn of [startBtn, pauseBtn, resetBtn]) btn.disabled = !commander;
  modeSelect.disabled = !commander;
  startBtn.classList.toggle("active", store.running);
  pauseBtn.classList.toggle("active", !store.running);

  renderHistory();
}

// ------------------------------------------------------------------
// Render loop
// ------------------------------------------------------------------
function resizeCanvas(): void {
  const dpr = window.devicePixelRatio || 1;
  const w = canvas.clientWidth;
  const h = canvas.clientHeight;
  if (canvas.width !== Math.round(w * dpr) || canvas.height !== Math.round(h * dpr)) {
    canvas.width = Math.round(w * dpr);
    canvas.height = Math.round(h * dpr);
  }
  ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
}

function frame(): void {
  resizeCanvas();
  renderScene(ctx, store, canvas.clientWidth, canvas.clientHeight);
  updateReadouts();
  requestAnimationFrame(frame);
}

urlInput.value = `ws://${location.hostname || "127.0.0.1"}:8765/ws`;
requestAnimationFrame(frame);
