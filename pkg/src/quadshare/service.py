"""Live teleoperation service.

Runs one wall-clock-paced simulation (`Simulation` with the scripted pilot
disabled) and exposes it on a WebSocket endpoint `/ws`. Messages in both
directions are JSON objects {"seq": int, "type": str, "data": object} with a
per-direction strictly increasing sequence number.

Server -> client types:
  hello      first message; role ("commander"/"observer"), sim parameters,
             track geometry, command vocabulary
  telemetry  one decimated simulation row (same fields as the CSV columns)
  ack        response to an accepted command/control message
  error      malformed or rejected input (session continues)
  gap        the client fell behind and `dropped` queued messages were
             discarded oldest-first

Client -> server types:
  command    {"command": "FORWARD"} — one BCI-surrogate intent; commander only
  control    {"action": "start"|"pause"|"reset"|"set-mode", ...} — commander only

The first connection holds command authority; later ones are telemetry-only
observers. When the commander disconnects the slot is freed for the next
connection, and with no brain input the arbiter ramps autopilot authority in
on its own. A diverged simulation broadcasts an error, resets, and pauses.
"""
from __future__ import annotations

import asyncio
import json
import math
import socket
from contextlib import asynccontextmanager, suppress
from dataclasses import asdict, dataclass, field

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .bci import VOCABULARY, BciCommand
from .config import ExperimentConfig
from .errors import PortInUse, SimulationDiverged
from .experiment import Simulation


@dataclass
class ClientSlot:
    """Per-connection outbound queue with drop-oldest congestion policy."""

    queue: asyncio.Queue
    commander: bool
    out_seq: int = 0
    in_seq: int = 0
    pending_gap: int = 0

    def offer(self, msg_type: str, data: dict) -> None:
        if self.pending_gap and msg_type == "telemetry":
            dropped, self.pending_gap = self.pending_gap, 0
            self._push("gap", {"dropped": dropped})
        self._push(msg_type, data)

    def _push(self, msg_type: str, data: dict) -> None:
        while self.queue.full():
            victim = self.queue.get_nowait()
            if victim["type"] == "gap":
                # Carry a displaced marker's count forward so every dropped
                # message stays accounted for in some later gap report.
                self.pending_gap += victim["data"]["dropped"]
            else:
                self.pending_gap += 1
        self.out_seq += 1
        self.queue.put_nowait({"seq": self.out_seq, "type": msg_type, "data": data})


class LiveService:
    """Owns the simulation, the client set, and inbound message handling."""

    def __init__(self, config: ExperimentConfig, time_scale: float | None = None):
        self.config = config
        self.time_scale = (
            time_scale if time_scale is not None else config.service.time_scale
        )
        if self.time_scale <= 0.0:
            raise ValueError(f"time_scale must be positive, got {self.time_scale}")
        self.decimation = config.service.decimation
        self.queue_limit = config.service.queue_limit
        self.sim = Simulation(config, config.mode, config.seed, pilot=False)
        self.clients: list[ClientSlot] = []
        self.commander: ClientSlot | None = None
        self.running = True
        self._steps = 0

    # --- connections ------------------------------------------------------

    def attach(self) -> ClientSlot:
        slot = ClientSlot(
            queue=asyncio.Queue(maxsize=self.queue_limit),
            commander=self.commander is None,
        )
        if slot.commander:
            self.commander = slot
        self.clients.append(slot)
        slot.offer("hello", self._hello(slot))
        return slot

    def detach(self, slot: ClientSlot) -> None:
        if slot in self.clients:
            self.clients.remove(slot)
        if self.commander is slot:
            self.commander = None

    def _hello(self, slot: ClientSlot) -> dict:
        track = self.config.track
        return {
            "role": "commander" if slot.commander else "observer",
            "mode": self.sim.mode,
            "running": self.running,
            "dt": self.sim.dt,
            "decimation": self.decimation,
            "time_scale": self.time_scale,
            "vocabulary": [c.value for c in VOCABULARY],
            "track": {
                "straight_len": track.straight_len,
                "arc_len": track.arc_len,
                "altitude": track.altitude,
                "radius": track.arc_len / math.pi,
                "total_length": self.sim.track.total_length,
            },
        }

    # --- simulation loop ----------------------------------------------------

    def tick(self) -> None:
        """One wall-clock tick: advance the sim and broadcast if due."""
        if not self.running:
            return
        try:
            row = self.sim.step()
        except SimulationDiverged as exc:
            self.broadcast("error", {"message": f"simulation diverged: {exc}; reset and paused"})
            self.sim = Simulation(self.config, self.sim.mode, self.config.seed, pilot=False)
            self._steps = 0
            self.running = False
            return
        if self._steps % self.decimation == 0:
            self.broadcast("telemetry", asdict(row))
        self._steps += 1

    async def run_loop(self) -> None:
        loop = asyncio.get_running_loop()
        period = self.sim.dt / self.time_scale
        next_t = loop.time()
        while True:
            self.tick()
            next_t += period
            delay = next_t - loop.time()
            if delay > 0.0:
                await asyncio.sleep(delay)
            elif delay < -1.0:
                next_t = loop.time()  # fell far behind; drop the backlog
                await asyncio.sleep(0)
            else:
                await asyncio.sleep(0)  # yield so handlers run

    def broadcast(self, msg_type: str, data: dict) -> None:
        for slot in self.clients:
            slot.offer(msg_type, data)

    # --- inbound messages ---------------------------------------------------

    def handle_text(self, slot: ClientSlot, text: str) -> None:
        try:
            msg = json.loads(text)
        except json.JSONDecodeError:
            slot.offer("error", {"message": "malformed JSON", "re": None})
            return
        if not isinstance(msg, dict):
            slot.offer("error", {"message": "message must be an object", "re": None})
            return
        seq = msg.get("seq")
        if not isinstance(seq, int) or seq <= slot.in_seq:
            slot.offer(
                "error",
                {
                    "message": f"seq must be an integer above {slot.in_seq}",
                    "re": seq if isinstance(seq, int) else None,
                },
            )
            return
        slot.in_seq = seq
        msg_type = msg.get("type")
        data = msg.get("data")
        if not isinstance(data, dict):
            data = {}
        if msg_type == "command":
            self._handle_command(slot, seq, data)
        elif msg_type == "control":
            self._handle_control(slot, seq, data)
        else:
            slot.offer("error", {"message": f"unknown message type {msg_type!r}", "re": seq})

    def _handle_command(self, slot: ClientSlot, seq: int, data: dict) -> None:
        if not slot.commander:
            slot.offer("error", {"message": "command authority belongs to another client", "re": seq})
            return
        name = data.get("command")
        try:
            intent = BciCommand(name)
        except ValueError:
            slot.offer("error", {"message": f"unknown command {name!r}", "re": seq})
            return
        emission = self.sim.emit(intent)
        if emission is None:
            slot.offer(
                "ack",
                {"re": seq, "accepted": False, "reason": "rate-limited", "t": self.sim.t},
            )
        else:
            slot.offer(
                "ack",
                {
                    "re": seq,
                    "accepted": True,
                    "intended": emission.intended.value,
                    "delivered": emission.delivered.value,
                    "corrupted": emission.corrupted,
                    "t_emit": emission.t_emit,
                    "t_deliver": emission.t_deliver,
                },
            )

    def _handle_control(self, slot: ClientSlot, seq: int, data: dict) -> None:
        if not slot.commander:
            slot.offer("error", {"message": "control authority belongs to another client", "re": seq})
            return
        action = data.get("action")
        if action == "start":
            self.running = True
        elif action == "pause":
            self.running = False
        elif action == "reset":
            self.sim = Simulation(
                self.config, self.sim.mode, self.config.seed, pilot=False
            )
            self._steps = 0
        elif action == "set-mode":
            try:
                self.sim.set_mode(data.get("mode"))
            except ValueError as exc:
                slot.offer("error", {"message": str(exc), "re": seq})
                return
        else:
            slot.offer("error", {"message": f"unknown control action {action!r}", "re": seq})
            return
        slot.offer("ack", {"re": seq, "action": action, "mode": self.sim.mode, "running": self.running})


def create_app(config: ExperimentConfig, time_scale: float | None = None) -> FastAPI:
    service = LiveService(config, time_scale)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(service.run_loop())
        try:
            yield
        finally:
            task.cancel()
            with suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.service = service

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        slot = service.attach()

        async def drain() -> None:
            while True:
                msg = await slot.queue.get()
                await websocket.send_text(json.dumps(msg))

        sender = asyncio.create_task(drain())
        try:
            while True:
                text = await websocket.receive_text()
                service.handle_text(slot, text)
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            with suppress(asyncio.CancelledError):
                await sender
            service.detach(slot)

    return app


def serve(
    config: ExperimentConfig,
    port: int | None = None,
    time_scale: float | None = None,
) -> None:
    """Run the live service until interrupted."""
    import uvicorn

    bind_port = port if port is not None else config.service.port
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind(("127.0.0.1", bind_port))
    except OSError as exc:
        raise PortInUse(f"port {bind_port} is not bindable: {exc}") from exc
    finally:
        probe.close()

    app = create_app(config, time_scale)
    uvicorn.run(app, host="127.0.0.1", port=bind_port, log_level="warning")
