/** Wire types for the live-service WebSocket protocol.
 *
 * Every frame in both directions is `{seq, type, data}` with a strictly
 * increasing per-direction sequence number. These shapes mirror the server's
 * JSON byte for byte; nothing here is interpreted beyond parsing.
 */

export const VOCABULARY = [
  "FORWARD",
  "BACK",
  "LEFT",
  "RIGHT",
  "ASCEND",
  "DESCEND",
  "YAW_LEFT",
  "YAW_RIGHT",
  "HOVER",
] as const;

export type Command = (typeof VOCABULARY)[number];

export interface TrackDims {
  straight_len: number;
  arc_len: number;
  altitude: number;
  radius: number;
  total_length: number;
}

export interface HelloData {
  role: "commander" | "observer";
  mode: string;
  running: boolean;
  dt: number;
  decimation: number;
  time_scale: number;
  vocabulary: string[];
  track: TrackDims;
}

export interface TelemetryRow {
  t: number;
  x: number;
  y: number;
  z: number;
  roll: number;
  pitch: number;
  yaw: number;
  ref_x: number;
  ref_y: number;
  ref_z: number;
  e_xt: number;
  rho: number;
  alpha: number;
  mode: "BRAIN" | "BLEND" | "AUTO";
  cmd: string;
  kp_eff: number;
  ki_eff: number;
  kd_eff: number;
  m1: number;
  m2: number;
  m3: number;
  m4: number;
  saturated: number;
}

export interface AckData {
  re: number;
  accepted?: boolean;
  reason?: string;
  intended?: string;
  delivered?: string;
  corrupted?: boolean;
  t_emit?: number;
  t_deliver?: number;
  action?: string;
  mode?: string;
  running?: boolean;
}

export type ServerMsg =
  | { seq: number; type: "hello"; data: HelloData }
  | { seq: number; type: "telemetry"; data: TelemetryRow }
  | { seq: number; type: "ack"; data: AckData }
  | { seq: number; type: "error"; data: { message: string; re?: number | null } }
  | { seq: number; type: "gap"; data: { dropped: number } };

export type ClientPayload =
  | { type: "command"; data: { command: Command } }
  | {
      type: "control";
      data: { action: "start" | "pause" | "reset" | "set-mode"; mode?: string };
    };

export type ClientMsg = ClientPayload & { seq: number };

/** Parse one server frame; null for anything that is not a known shape. */
export function parseServerMsg(raw: string): ServerMsg | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const m = msg as { seq?: unknown; type?: unknown; data?: unknown };
  if (typeof m.seq !== "number" || typeof m.type !== "string") return null;
  if (typeof m.data !== "object" || m.data === null) return null;
  switch (m.type) {
    case "hello":
    case "telemetry":
    case "ack":
    case "error":
    case "gap":
      return msg as ServerMsg;
    default:
      return null;
  }
}
