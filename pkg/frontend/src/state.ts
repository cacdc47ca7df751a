/** Session state: everything the panel renders, driven only by server frames.
 *
 * The store never extrapolates — the vehicle marker, trail, gauges, and
 * command outcomes all come from received messages, so feeding the same
 * frame sequence to a fresh store reproduces the same scene (the replay
 * property the tests pin down).
 */
import type { AckData, Command, HelloData, ServerMsg, TelemetryRow } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export type CommandOutcome =
  | "queued" // waiting for the socket to open
  | "sent" // on the wire, no ack yet
  | "dropped" // rate-limited by the channel
  | "pending" // accepted; outcome known, waiting for delivery time
  | "delivered" // arrived as intended
  | "corrupted" // arrived as a different command
  | "failed"; // server rejected the message

export interface HistoryEntry {
  seq: number | null; // client sequence number; null while queued
  intended: Command;
  outcome: CommandOutcome;
  delivered?: string;
  tDeliver?: number;
  note?: string;
}

export const TRAIL_LIMIT = 20_000;
export const HISTORY_LIMIT = 24;

export class SessionStore {
  connection: ConnectionStatus = "connecting";
  hello: HelloData | null = null;
  latest: TelemetryRow | null = null;
  trail: Array<[number, number]> = [];
  history: HistoryEntry[] = [];
  lastError = "";
  running = true;
  /** Session control mode (auto/brain/shared), from hello and set-mode acks. */
  sessionMode = "";
  /** Telemetry frames the server discarded because this client lagged. */
  droppedFrames = 0;
  lastServerSeq = 0;
  /** Count of server frames whose seq failed to increase (should stay 0). */
  seqViolations = 0;

  get role(): "commander" | "observer" | null {
    return this.hello ? this.hello.role : null;
  }

  get alpha(): number {
    return this.latest ? this.latest.alpha : 1.0;
  }

  noteOpen(): void {
    this.connection = "open";
  }

  noteClosed(): void {
    this.connection = "closed";
  }

  /** Reset per-connection state (a reconnect starts a fresh session). */
  noteReconnecting(): void {
    this.connection = "connecting";
    this.hello = null;
    this.lastServerSeq = 0;
  }

  commandQueued(intended: Command): void {
    this.pushHistory({ seq: null, intended, outcome: "queued" });
  }

  commandSent(seq: number, intended: Command): void {
    const queued = this.history.find((h) => h.outcome === "queued" && h.intended === intended);
    if (queued) {
      queued.seq = seq;
      queued.outcome = "sent";
      return;
    }
    this.pushHistory({ seq, intended, outcome: "sent" });
  }

  handleServer(msg: ServerMsg): void {
    if (msg.seq <= this.lastServerSeq) this.seqViolations += 1;
    this.lastServerSeq = msg.seq;
    switch (msg.type) {
      case "hello":
        this.hello = msg.data;
        this.running = msg.data.running;
        this.sessionMode = msg.data.mode;
        break;
      case "telemetry":
        this.applyTelemetry(msg.data);
        break;
      case "ack":
        this.applyAck(msg.data);
        break;
      case "error":
        this.lastError = msg.data.message;
        this.failCommand(msg.data.re ?? null, msg.data.message);
        break;
      case "gap":
        this.droppedFrames += msg.data.dropped;
        break;
    }
  }

  private applyTelemetry(row: TelemetryRow): void {
    this.latest = row;
    this.trail.push([row.x, row.y]);
    if (this.trail.length > TRAIL_LIMIT) this.trail.shift();
    // Promote accepted commands once simulation time reaches their delivery.
    for (const entry of this.history) {
      if (entry.outcome === "pending" && entry.tDeliver !== undefined && row.t >= entry.tDeliver) {
        entry.outcome = entry.delivered === entry.intended ? "delivered" : "corrupted";
      }
    }
  }

  private applyAck(ack: AckData): void {
    if (ack.running !== undefined) this.running = ack.running;
    if (ack.mode !== undefined) this.sessionMode = ack.mode;
    const entry = this.history.find((h) => h.seq === ack.re);
    if (!entry) return; // ack for a control message
    if (ack.accepted === false) {
      entry.outcome = "dropped";
      entry.note = ack.reason;
    } else if (ack.accepted === true) {
      entry.outcome = "pending";
      entry.delivered = ack.delivered;
      entry.tDeliver = ack.t_deliver;
    }
  }

  private failCommand(re: number | null, message: string): void {
    if (re === null) return;
    const entry = this.history.find((h) => h.seq === re);
    if (entry) {
      entry.outcome = "failed";
      entry.note = message;
    }
  }

  private pushHistory(entry: HistoryEntry): void {
    this.history.push(entry);
    if (this.history.length > HISTORY_LIMIT) this.history.shift();
  }
}

/** Feed a recorded frame sequence through a fresh store (offline replay). */
export function replay(frames: ServerMsg[]): SessionStore {
  const store = new SessionStore();
  store.noteOpen();
  for (const frame of frames) store.handleServer(frame);
  return store;
}
