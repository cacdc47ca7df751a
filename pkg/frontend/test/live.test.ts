/** Round-trip against the real service: boots `serve` as a subprocess,
 * drives it with a scripted commander, captures a 60-simulated-second
 * session, and checks the replayed capture paints the same trail.
 */
import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { type AckData, parseServerMsg, type ServerMsg, VOCABULARY } from "../src/protocol.js";
import { renderScene } from "../src/scene.js";
import { Sender } from "../src/sender.js";
import { replay, SessionStore } from "../src/state.js";

const REPO_ROOT = resolve(fileURLToPath(new URL(".", import.meta.url)), "..", "..");
const TIME_SCALE = 25; // 60 simulated seconds ≈ 2.4 s of wall clock
const COMMANDS = 20;

function sleep(ms: number): Promise<void> {
  return new Promise((r) => setTimeout(r, ms));
}

function freePort(): Promise<number> {
  return new Promise((resolvePort, reject) => {
    const srv = createServer();
    srv.once("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const addr = srv.address();
      if (addr && typeof addr === "object") {
        srv.close(() => resolvePort(addr.port));
      } else {
        reject(new Error("listen() returned no port"));
      }
    });
  });
}

async function connectRetry(url: string, deadlineMs: number): Promise<WebSocket> {
  const start = Date.now();
  for (;;) {
    try {
      return await new Promise<WebSocket>((resolveWs, reject) => {
        const ws = new WebSocket(url);
        ws.once("open", () => resolveWs(ws));
        ws.once("error", reject);
      });
    } catch (err) {
      if (Date.now() - start > deadlineMs) {
        throw new Error(`service never accepted a connection: ${String(err)}`);
      }
      await sleep(250);
    }
  }
}

/** Minimal canvas stand-in: records the full draw-call sequence. */
function recordingCtx() {
  const ops: unknown[][] = [];
  const push =
    (name: string) =>
    (...args: number[]) =>
      ops.push([name, ...args]);
  return {
    ops,
    fillStyle: "" as string | CanvasGradient | CanvasPattern,
    strokeStyle: "" as string | CanvasGradient | CanvasPattern,
    lineWidth: 0,
    globalAlpha: 1,
    beginPath: push("beginPath"),
    moveTo: push("moveTo"),
    lineTo: push("lineTo"),
    closePath: push("closePath"),
    stroke: push("stroke"),
    fill: push("fill"),
    fillRect: push("fillRect"),
    arc: push("arc"),
  };
}

describe("live service round-trip", () => {
  let server: ChildProcess;
  let serverLog = "";
  let ws: WebSocket;
  const frames: ServerMsg[] = [];
  const live = new SessionStore();
  const acks = new Map<number, AckData>();
  const sentSeqs: number[] = [];
  let captureFile = "";

  beforeAll(async () => {
    const port = await freePort();
    server = spawn(
      "python3",
      ["-m", "quadshare.cli", "serve", "--port", String(port), "--time-scale", String(TIME_SCALE)],
      { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
    );
    server.stdout?.on("data", (d: Buffer) => (serverLog += d.toString()));
    server.stderr?.on("data", (d: Buffer) => (serverLog += d.toString()));

    ws = await connectRetry(`ws://127.0.0.1:${port}/ws`, 90_000);
    live.noteOpen();

    let firstT: number | null = null;
    let telemetrySeen = 0;
    let beginSending!: () => void;
    const streaming = new Promise<void>((r) => (beginSending = r));
    let finishCapture!: () => void;
    const captured = new Promise<void>((r) => (finishCapture = r));
    ws.on("message", (data) => {
      const msg = parseServerMsg(String(data));
      if (!msg) return;
      frames.push(msg);
      live.handleServer(msg);
      if (msg.type === "ack" && typeof msg.data.re === "number") acks.set(msg.data.re, msg.data);
      if (msg.type === "telemetry") {
        if (firstT === null) firstT = msg.data.t;
        if (++telemetrySeen === 10) beginSending();
        if (msg.data.t - firstT >= 60) finishCapture();
      }
    });

    // hold off until telemetry streams steadily, past any first-step
    // compile stall, so wall-clock send spacing maps onto simulation time
    await streaming;

    const sender = new Sender();
    sender.attach(ws as unknown as { readyState: number; send(data: string): void });
    for (let i = 0; i < COMMANDS; i++) {
      const res = sender.command(VOCABULARY[i % VOCABULARY.length]!);
      if (res.ok) sentSeqs.push(res.seq);
      // well beyond the channel's refractory period at this time scale
      await sleep(120);
    }

    await captured;
    ws.removeAllListeners("message");

    captureFile = join(mkdtempSync(join(tmpdir(), "teleop-")), "session.json");
    writeFileSync(captureFile, JSON.stringify(frames), "utf-8");
  }, 120_000);

  afterAll(async () => {
    try {
      ws?.close();
    } catch {
      // already closed
    }
    if (server && !server.killed) {
      server.kill("SIGTERM");
      await sleep(300);
      server.kill("SIGKILL");
    }
    if (live.seqViolations > 0 || frames.length === 0) {
      // surface the service's own words when something went wrong
      console.error(serverLog.slice(-2000));
    }
  });

  it("joins as the commander and learns the circuit dimensions", () => {
    expect(live.role).toBe("commander");
    expect(live.hello?.track.total_length).toBeCloseTo(714, 9);
    expect(live.hello?.time_scale).toBe(TIME_SCALE);
  });

  it("gets an acknowledgement for each of the 20 scripted commands", () => {
    expect(sentSeqs.length).toBe(COMMANDS);
    for (const seq of sentSeqs) {
      expect(acks.has(seq), `ack for client seq ${seq}`).toBe(true);
    }
    const accepted = sentSeqs.filter((s) => acks.get(s)?.accepted === true);
    expect(accepted.length).toBe(COMMANDS); // spacing clears the rate limit
    for (const seq of accepted) {
      const ack = acks.get(seq)!;
      expect(typeof ack.delivered).toBe("string");
      expect(ack.t_deliver!).toBeGreaterThanOrEqual(ack.t_emit!);
    }
  });

  it("receives strictly increasing telemetry sequence numbers all session", () => {
    const telemetry = frames.filter(
      (f): f is Extract<ServerMsg, { type: "telemetry" }> => f.type === "telemetry",
    );
    expect(telemetry.length).toBeGreaterThan(100);
    let prev = 0;
    for (const f of frames) {
      expect(f.seq).toBeGreaterThan(prev);
      prev = f.seq;
    }
    expect(live.seqViolations).toBe(0);
    const tFirst = telemetry[0]!.data.t;
    const tLast = telemetry[telemetry.length - 1]!.data.t;
    expect(tLast - tFirst).toBeGreaterThanOrEqual(60);
  });

  it("replays the captured session file to the identical final trail", () => {
    const recorded = JSON.parse(readFileSync(captureFile, "utf-8")) as ServerMsg[];
    const replayed = replay(recorded);
    expect(replayed.trail.length).toBe(live.trail.length);
    expect(replayed.trail).toEqual(live.trail);
    expect(replayed.latest).toEqual(live.latest);

    const liveCanvas = recordingCtx();
    const replayCanvas = recordingCtx();
    renderScene(liveCanvas, live, 800, 600);
    renderScene(replayCanvas, replayed, 800, 600);
    expect(replayCanvas.ops).toEqual(liveCanvas.ops);
  });
});
