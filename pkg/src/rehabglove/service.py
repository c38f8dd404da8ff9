"""TCP NDJSON service exposing a session to UI observers.

One JSON object per line in both directions. Every outbound message is
{"v":1,"t_s":<seconds>,"type":<kind>,"data":{...}}: session events keep
their simulated timestamps, service-origin messages (snapshot, ack,
error, emg frames) carry seconds since server start. A client joining
mid-session atomically receives a state snapshot and then the live tail.

The first connection to send a valid control message becomes the
operator; control from anyone else is rejected while that connection
lives. Stalled observers only ever lose emg frame messages (oldest
first); session events are never dropped.
"""

from __future__ import annotations

import json
import logging
import socket
import threading
import time
from collections import deque

from .errors import ValidationError
from .session import (
    END_ABORTED,
    END_SOURCE_EXHAUSTED,
    Protocol,
    SessionControl,
    SessionEvent,
    SessionLog,
    replay,
)

log = logging.getLogger(__name__)

WIRE_VERSION = 1
CONTROL_ACTIONS = ("start", "pause", "abort", "select_protocol")

# Kinds that must survive backpressure. Everything else is best-effort;
# in practice only emg frames are ever dropped.
CRITICAL_KINDS = frozenset(
    {"instruction_shown", "classified", "command_issued", "step_result", "session_end"}
)

MAX_LINE_BYTES = 1_000_000


def wire_message(msg_type: str, t_s: float, data: dict) -> dict:
    return {"v": WIRE_VERSION, "t_s": t_s, "type": msg_type, "data": data}


def encode_wire(msg: dict) -> bytes:
    return (json.dumps(msg, separators=(",", ":")) + "\n").encode("utf-8")


def event_to_wire(ev: SessionEvent) -> dict:
    return wire_message(ev.kind, ev.t, ev.payload)


class _Client:
    """One connection: bounded outbox plus a blocking writer thread."""

    def __init__(self, sock: socket.socket, addr, max_queue: int):
        self.sock = sock
        self.addr = addr
        self.max_queue = max_queue
        self.cond = threading.Condition()
        self.outbox: deque[tuple[bytes, bool]] = deque()
        self.closed = False
        self.dropped_frames = 0

    def enqueue(self, payload: bytes, droppable: bool) -> None:
        with self.cond:
            if self.closed:
                return
            if len(self.outbox) >= self.max_queue:
                # Make room by discarding the oldest droppable entry; if the
                # backlog is all critical it is allowed to grow instead.
                for i, (_, d) in enumerate(self.outbox):
                    if d:
                        del self.outbox[i]
                        self.dropped_frames += 1
                        break
            self.outbox.append((payload, droppable))
            self.cond.notify()

    def writer_loop(self) -> None:
        try:
            while True:
                with self.cond:
                    while not self.outbox and not self.closed:
                        self.cond.wait()
                    if self.closed and not self.outbox:
                        return
                    payload, _ = self.outbox.popleft()
                self.sock.sendall(payload)
        except OSError:
            pass
        finally:
            self.close()

    def close(self) -> None:
        with self.cond:
            if self.closed:
                return
            self.closed = True
            self.cond.notify_all()
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


def _iter_lines(sock: socket.socket):
    """Yield decoded lines; oversized garbage yields None once per overrun."""
    buf = bytearray()
    skipping = False
    while True:
        try:
            chunk = sock.recv(65536)
        except OSError:
            return
        if not chunk:
            return
        buf.extend(chunk)
        while True:
            nl = buf.find(b"\n")
            if nl < 0:
                if len(buf) > MAX_LINE_BYTES:
                    buf.clear()
                    if not skipping:
                        skipping = True
                        yield None
                break
            raw = bytes(buf[:nl])
            del buf[: nl + 1]
            if skipping:
                skipping = False
                continue
            yield raw.decode("utf-8", errors="replace")


class SessionServer:
    """Serves one session (live or replayed) to any number of observers."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        *,
        session_factory=None,
        replay_log: SessionLog | None = None,
        protocol: Protocol | None = None,
        pace: bool = False,
        max_queue: int = 512,
    ):
        if (session_factory is None) == (replay_log is None):
            raise ValidationError("provide exactly one of session_factory or replay_log")
        self._session_factory = session_factory
        self._replay_log = replay_log
        self.protocol = protocol
        self.pace = pace
        self.max_queue = max_queue
        self._host = host
        self._port = port
        self._listener: socket.socket | None = None
        self._clients: list[_Client] = []
        self._lock = threading.RLock()
        self._threads: list[threading.Thread] = []
        self._control = SessionControl()
        self._operator: _Client | None = None
        self._session_thread: threading.Thread | None = None
        self._stopping = False
        self._t0 = time.monotonic()
        # Observable session state, mutated only by control messages and
        # pipeline events.
        self._status = "idle"
        self._instruction: dict | None = None
        self._step_index: int | None = None
        self._tally = {"success": 0, "mismatch": 0, "timeout": 0}
        self._glove: dict | None = None
        self._end_reason: str | None = None

    # -- lifecycle -----------------------------------------------------

    def start(self) -> None:
        self._listener = socket.create_server((self._host, self._port))
        self._port = self._listener.getsockname()[1]
        t = threading.Thread(target=self._accept_loop, name="accept", daemon=True)
        t.start()
        self._threads.append(t)

    @property
    def address(self) -> tuple[str, int]:
        return (self._host, self._port)

    def stop(self) -> None:
        self._stopping = True
        self._control.abort()
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass
        with self._lock:
            clients = list(self._clients)
        for c in clients:
            c.close()
        if self._session_thread is not None:
            self._session_thread.join(timeout=5)

    def serve_forever(self) -> None:
        try:
            while not self._stopping:
                time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    # -- fan-out -------------------------------------------------------

    def _wall_t(self) -> float:
        return time.monotonic() - self._t0

    def _broadcast(self, msg: dict, droppable: bool) -> None:
        payload = encode_wire(msg)
        with self._lock:
            clients = list(self._clients)
        for c in clients:
            c.enqueue(payload, droppable)

    def _on_event(self, ev: SessionEvent) -> None:
        with self._lock:
            if ev.kind == "instruction_shown":
                self._instruction = ev.payload
                self._step_index = ev.payload.get("step_index")
            elif ev.kind == "step_result":
                outcome = ev.payload.get("outcome")
                if outcome in self._tally:
                    self._tally[outcome] += 1
            elif ev.kind == "glove_state":
                self._glove = ev.payload
            elif ev.kind == "session_end":
                self._status = "ended"
                self._end_reason = ev.payload.get("reason")
                self._instruction = None
        self._broadcast(event_to_wire(ev), droppable=ev.kind not in CRITICAL_KINDS)

    def _on_frame(self, samples: list[tuple[float, float]], rate_hz: float) -> None:
        data = {
            "t0_s": samples[0][0],
            "rate_hz": rate_hz,
            "v_mv": [v for _, v in samples],
        }
        self._broadcast(wire_message("emg", self._wall_t(), data), droppable=True)

    def _snapshot_msg(self) -> dict:
        data = {
            "status": self._status,
            "protocol": self.protocol.to_dict() if self.protocol else None,
            "instruction": self._instruction,
            "step_index": self._step_index,
            "tally": dict(self._tally),
            "glove": self._glove,
            "end_reason": self._end_reason,
        }
        return wire_message("snapshot", self._wall_t(), data)

    # -- inbound -------------------------------------------------------

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stopping:
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            client = _Client(sock, addr, self.max_queue)
            # Register and snapshot under the lock so no event broadcast can
            # slip between the snapshot and the start of the tail.
            with self._lock:
                self._clients.append(client)
                client.enqueue(encode_wire(self._snapshot_msg()), droppable=False)
            for target in (client.writer_loop, lambda c=client: self._reader_loop(c)):
                t = threading.Thread(target=target, daemon=True)
                t.start()
                self._threads.append(t)

    def _reader_loop(self, client: _Client) -> None:
        try:
            for line in _iter_lines(client.sock):
                if line is None:
                    self._reply_error(client, "oversized message discarded")
                    continue
                if not line.strip():
                    continue
                try:
                    self._handle_inbound(client, line)
                except Exception as exc:  # never let junk kill the service
                    log.exception("inbound handling failed")
                    self._reply_error(client, f"internal error: {exc}")
        finally:
            self._drop_client(client)

    def _drop_client(self, client: _Client) -> None:
        client.close()
        with self._lock:
            if client in self._clients:
                self._clients.remove(client)
            if self._operator is client:
                self._operator = None

    def _reply(self, client: _Client, msg: dict) -> None:
        client.enqueue(encode_wire(msg), droppable=False)

    def _reply_error(self, client: _Client, error: str, detail: str | None = None) -> None:
        data = {"error": error}
        if detail:
            data["detail"] = detail
        self._reply(client, wire_message("error", self._wall_t(), data))

    def _handle_inbound(self, client: _Client, line: str) -> None:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            self._reply_error(client, "malformed json", str(exc))
            return
        if not isinstance(msg, dict) or msg.get("type") != "control":
            self._reply_error(client, "expected a control message")
            return
        if msg.get("v", WIRE_VERSION) != WIRE_VERSION:
            self._reply_error(client, f"unsupported wire version {msg.get('v')!r}")
            return
        action = msg.get("action")
        if action not in CONTROL_ACTIONS:
            self._reply_error(client, f"unknown action {action!r}")
            return
        with self._lock:
            if self._operator is None:
                self._operator = client
            elif self._operator is not client:
                self._reply_error(client, "operator_conflict", "another operator is connected")
                return
        self._apply_control(client, action, msg)

    def _apply_control(self, client: _Client, action: str, msg: dict) -> None:
        with self._lock:
            if action == "start":
                if self._status != "idle":
                    self._reply_error(client, f"cannot start while {self._status}")
                    return
                self._status = "running"
                self._session_thread = threading.Thread(
                    target=self._run_source, name="session", daemon=True
                )
                self._session_thread.start()
            elif action == "pause":
                if self._status not in ("running", "paused"):
                    self._reply_error(client, f"cannot pause while {self._status}")
                    return
                if self._control.paused:
                    self._control.resume()
                    self._status = "running"
                else:
                    self._control.pause()
                    self._status = "paused"
            elif action == "abort":
                if self._status == "ended":
                    self._reply_error(client, "session already ended")
                    return
                self._control.abort()
                if self._status == "idle":
                    self._status = "ended"
                    self._end_reason = END_ABORTED
            elif action == "select_protocol":
                if self._status != "idle":
                    self._reply_error(client, f"cannot change protocol while {self._status}")
                    return
                try:
                    self.protocol = Protocol.from_dict(msg.get("protocol") or {})
                except ValidationError as exc:
                    self._reply_error(client, "invalid protocol", str(exc))
                    return
        self._reply(
            client,
            wire_message("ack", self._wall_t(), {"action": action, "status": self._status}),
        )

    def _run_source(self) -> None:
        try:
            if self._replay_log is not None:
                self._run_replay()
            else:
                self._session_factory(
                    protocol=self.protocol,
                    on_event=self._on_event,
                    on_frame=self._on_frame,
                    control=self._control,
                    pace=self.pace,
                )
        except Exception:
            log.exception("session source failed")
        finally:
            with self._lock:
                if self._status != "ended":
                    self._status = "ended"

    def _run_replay(self) -> None:
        assert self._replay_log is not None
        saw_end = False
        for ev in replay(self._replay_log, fast=not self.pace):
            if self._control.aborted:
                break
            self._control.wait_while_paused()
            if self._control.aborted:
                break
            self._on_event(ev)
            saw_end = ev.kind == "session_end"
        if not saw_end:
            # Observers must always see a terminal event, even when the log
            # was cut short (or empty) or the operator aborted mid-replay.
            reason = END_ABORTED if self._control.aborted else END_SOURCE_EXHAUSTED
            self._on_event(
                SessionEvent(
                    t=self._replay_log.events[-1].t + 1e-6 if self._replay_log.events else 0.0,
                    kind="session_end",
                    payload={"reason": reason},
                )
            )
