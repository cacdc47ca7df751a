/** Outbound message sequencing over a WebSocket-like transport.
 *
 * Client messages must carry strictly increasing `seq` values, and the
 * server starts every session afresh — so the counter lives here and is
 * reset whenever a new socket is attached. While the socket is not open,
 * a single pending message is held back and flushed on open; anything
 * beyond that is rejected so a dead link surfaces immediately instead of
 * silently buffering stale commands.
 */
import type { ClientPayload, Command } from "./protocol.js";

export interface Outbound {
  readonly readyState: number;
  send(data: string): void;
}

const OPEN = 1;

export type SendResult =
  | { ok: true; seq: number }
  | { ok: false; queued: true }
  | { ok: false; queued: false; reason: string };

export class Sender {
  private socket: Outbound | null = null;
  private seq = 0;
  private pending: ClientPayload | null = null;

  /** Attach a fresh socket; sequence numbers restart with the session. */
  attach(socket: Outbound): void {
    this.socket = socket;
    this.seq = 0;
    this.pending = null;
  }

  detach(): void {
    this.socket = null;
    this.pending = null;
  }

  get nextSeq(): number {
    return this.seq + 1;
  }

  command(name: Command): SendResult {
    return this.dispatch({ type: "command", data: { command: name } });
  }

  control(action: "start" | "pause" | "reset"): SendResult {
    return this.dispatch({ type: "control", data: { action } });
  }

  setMode(mode: string): SendResult {
    return this.dispatch({ type: "control", data: { action: "set-mode", mode } });
  }

  /** Flush the held-back message once the socket reports open. */
  flush(): { payload: ClientPayload; result: SendResult } | null {
    if (!this.pending) return null;
    const payload = this.pending;
    this.pending = null;
    return { payload, result: this.dispatch(payload) };
  }

  private dispatch(msg: ClientPayload): SendResult {
    const sock = this.socket;
    if (!sock) return { ok: false, queued: false, reason: "not connected" };
    if (sock.readyState !== OPEN) {
      if (this.pending) {
        return { ok: false, queued: false, reason: "a command is already waiting for the link" };
      }
      this.pending = msg;
      return { ok: false, queued: true };
    }
    const seq = ++this.seq;
    sock.send(JSON.stringify({ seq, ...msg }));
    return { ok: true, seq };
  }
}
