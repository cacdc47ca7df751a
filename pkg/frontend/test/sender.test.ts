import { describe, expect, it } from "vitest";

import { Sender } from "../src/sender.js";

class FakeSocket {
  sent: string[] = [];
  constructor(public readyState: number) {}
  send(data: string): void {
    this.sent.push(data);
  }
}

describe("Sender", () => {
  it("writes a command to the wire immediately with sequence 1", () => {
    const sock = new FakeSocket(1);
    const sender = new Sender();
    sender.attach(sock);
    const res = sender.command("FORWARD");
    expect(res).toEqual({ ok: true, seq: 1 });
    expect(sock.sent).toEqual(['{"seq":1,"type":"command","data":{"command":"FORWARD"}}']);
  });

  it("numbers commands and controls from one strictly increasing counter", () => {
    const sock = new FakeSocket(1);
    const sender = new Sender();
    sender.attach(sock);
    sender.command("FORWARD");
    sender.control("pause");
    const third = sender.setMode("auto");
    expect(third).toEqual({ ok: true, seq: 3 });
    const seqs = sock.sent.map((s) => (JSON.parse(s) as { seq: number }).seq);
    expect(seqs).toEqual([1, 2, 3]);
    expect(JSON.parse(sock.sent[2]!)).toEqual({
      seq: 3,
      type: "control",
      data: { action: "set-mode", mode: "auto" },
    });
  });

  it("queues one message while the socket is not open, then errors", () => {
    const sock = new FakeSocket(0); // connecting
    const sender = new Sender();
    sender.attach(sock);
    expect(sender.command("HOVER")).toEqual({ ok: false, queued: true });
    const second = sender.command("FORWARD");
    expect(second.ok).toBe(false);
    expect(second).toMatchObject({ queued: false });
    if (!second.ok && !second.queued) expect(second.reason).toContain("waiting");
    expect(sock.sent).toEqual([]);
  });

  it("flushes the held message once the socket opens", () => {
    const sock = new FakeSocket(0);
    const sender = new Sender();
    sender.attach(sock);
    sender.command("HOVER");
    sock.readyState = 1;
    const flushed = sender.flush();
    expect(flushed?.payload).toEqual({ type: "command", data: { command: "HOVER" } });
    expect(flushed?.result).toEqual({ ok: true, seq: 1 });
    expect(sock.sent.length).toBe(1);
    expect(sender.flush()).toBeNull(); // nothing left
  });

  it("behaves the same on a closed socket: queue one, then error", () => {
    const sock = new FakeSocket(3); // closed
    const sender = new Sender();
    sender.attach(sock);
    expect(sender.command("LEFT")).toEqual({ ok: false, queued: true });
    expect(sender.command("RIGHT").ok).toBe(false);
    expect(sock.sent).toEqual([]);
  });

  it("restarts sequence numbers and drops the backlog on a new session", () => {
    const first = new FakeSocket(1);
    const sender = new Sender();
    sender.attach(first);
    sender.command("FORWARD");
    sender.command("BACK");
    expect(sender.nextSeq).toBe(3);

    const second = new FakeSocket(0);
    sender.attach(second);
    expect(sender.nextSeq).toBe(1);
    expect(sender.flush()).toBeNull();
    second.readyState = 1;
    expect(sender.command("HOVER")).toEqual({ ok: true, seq: 1 });
  });

  it("reports an error when no socket was ever attached", () => {
    const sender = new Sender();
    const res = sender.command("HOVER");
    expect(res).toMatchObject({ ok: false, queued: false });
  });
});
