/** Keyboard bindings for the command palette. */
import type { Command } from "./protocol.js";

export const KEYMAP: Readonly<Record<string, Command>> = {
  w: "FORWARD",
  s: "BACK",
  a: "LEFT",
  d: "RIGHT",
  r: "ASCEND",
  f: "DESCEND",
  q: "YAW_LEFT",
  e: "YAW_RIGHT",
  " ": "HOVER",
};

/** Map a KeyboardEvent.key to a command, or null if unbound. */
export function commandForKey(key: string): Command | null {
  const k = key.length === 1 ? key.toLowerCase() : key;
  return KEYMAP[k] ?? null;
}
