"""Authoritative board server: one sequencer, a delta log, and HTTP on top.

All writes funnel through a single lock; each command gets the next sequence
number and produces exactly one Delta, whether it was accepted or rejected.
Rejected commands consume a sequence number too, so every replica sees the
same totally ordered history and can account for every command it sent.

Duplicate submissions (same client_id + command_id) return the original
delta without re-applying or appending anything, which makes retries safe.

Transport is plain HTTP/1.1 (stdlib only):

  GET  /health            liveness, no auth
  GET  /snapshot          current state image for checkout
  GET  /deltas?from=N     close-delimited NDJSON stream of deltas, live
  POST /command           submit one command record
  POST /commands          submit an NDJSON batch, one result line each

Every authenticated route takes ``Authorization: Bearer <token>``; the token
decides the caller's role. At most one manager may hold a delta stream at a
time (the wall console); a second manager subscription gets 409.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Mapping
from urllib.parse import parse_qs, urlparse

from .errors import (
    AuthorizationError,
    CommandRejected,
    JournalCorruption,
    ValidationError,
)
from .journal import Journal
from .state import BoardState, Command, Role
from .topology import Topology


@dataclass(frozen=True)
class Delta:
    """One totally ordered log entry: a command and what became of it."""

    seq: int
    command: dict
    accepted: bool
    digest: str
    reason_code: str | None = None
    reason: str | None = None

    def outcome(self) -> dict:
        if self.accepted:
            return {"accepted": True}
        return {
            "accepted": False,
            "reason_code": self.reason_code,
            "reason": self.reason,
        }

    def to_record(self) -> dict:
        return {
            "seq": self.seq,
            "command": self.command,
            "outcome": self.outcome(),
            "digest": self.digest,
        }

    @staticmethod
    def from_record(raw: object) -> "Delta":
        if not isinstance(raw, Mapping):
            raise ValidationError("delta must be an object")
        seq = raw.get("seq")
        if not isinstance(seq, int) or isinstance(seq, bool) or seq < 1:
            raise ValidationError("delta.seq must be a positive integer")
        command = raw.get("command")
        if not isinstance(command, Mapping):
            raise ValidationError("delta.command must be an object")
        outcome = raw.get("outcome")
        if not isinstance(outcome, Mapping) or not isinstance(outcome.get("accepted"), bool):
            raise ValidationError("delta.outcome must carry a boolean 'accepted'")
        digest = raw.get("digest")
        if not isinstance(digest, str) or len(digest) != 64:
            raise ValidationError("delta.digest must be a sha256 hex string")
        return Delta(
            seq=seq,
            command=dict(command),
            accepted=outcome["accepted"],
            digest=digest,
            reason_code=outcome.get("reason_code"),
            reason=outcome.get("reason"),
        )


class BoardServer:
    """The sequencer. Transport-independent; safe for concurrent submit()."""

    def __init__(self, topology: Topology, journal: Journal | None = None):
        self.state = BoardState(topology)
        self.journal = journal
        self.deltas: list[Delta] = []
        self._lock = threading.Lock()
        self._outcomes: dict[tuple[str, str], int] = {}  # (client, command) -> seq
        self._subscribers: list[queue.SimpleQueue] = []
        self._manager_stream_busy = False
        if journal is not None:
            self._replay(journal.recover())

    # -- startup -------------------------------------------------------------

    def _replay(self, records: list[dict]) -> None:
        for record in records:
            delta = Delta.from_record(record)
            expected = len(self.deltas) + 1
            if delta.seq != expected:
                raise JournalCorruption(
                    f"journal sequence jumps to {delta.seq}, expected {expected}"
                )
            if delta.accepted:
                command = Command.from_record(delta.command)
                try:
                    self.state.apply(command)
                except CommandRejected as exc:
                    raise JournalCorruption(
                        f"journaled command {delta.seq} no longer applies: {exc}"
                    ) from None
            self.deltas.append(delta)
            key = self._dedup_key(delta.command)
            if key is not None:
                self._outcomes.setdefault(key, delta.seq)
        if self.deltas and self.deltas[-1].digest != self.state.digest():
            raise JournalCorruption("journal digest does not match replayed state")

    @staticmethod
    def _dedup_key(command_record: Mapping) -> tuple[str, str] | None:
        issuer = command_record.get("issuer")
        if not isinstance(issuer, Mapping):
            return None
        client_id = issuer.get("client_id")
        command_id = command_record.get("command_id")
        if isinstance(client_id, str) and isinstance(command_id, str):
            return (client_id, command_id)
        return None

    # -- the write path --------------------------------------------------------

    @property
    def seq(self) -> int:
        return len(self.deltas)

    def submit(self, command: Command) -> tuple[Delta, bool]:
        """Sequence one command. Returns (delta, created).

        created is False when this exact submission was seen before; the
        original delta is returned and nothing changes.
        """
        with self._lock:
            key = (command.issuer.client_id, command.command_id)
            known = self._outcomes.get(key)
            if known is not None:
                return self.deltas[known - 1], False
            record = command.to_record()
            try:
                self.state.apply(command)
            except CommandRejected as exc:
                delta = Delta(
                    seq=len(self.deltas) + 1,
                    command=record,
                    accepted=False,
                    digest=self.state.digest(),
                    reason_code=exc.reason_code,
                    reason=str(exc),
                )
            else:
                delta = Delta(
                    seq=len(self.deltas) + 1,
                    command=record,
                    accepted=True,
                    digest=self.state.digest(),
                )
            return self._commit(key, delta), True

    def submit_rejected(
        self, command: Command, reason_code: str, reason: str
    ) -> tuple[Delta, bool]:
        """Sequence a rejection decided outside the state machine (e.g. a
        transport-level authorization failure), so the submitter still gets
        a full audit record."""
        with self._lock:
            key = (command.issuer.client_id, command.command_id)
            known = self._outcomes.get(key)
            if known is not None:
                return self.deltas[known - 1], False
            delta = Delta(
                seq=len(self.deltas) + 1,
                command=command.to_record(),
                accepted=False,
                digest=self.state.digest(),
                reason_code=reason_code,
                reason=reason,
            )
            return self._commit(key, delta), True

    def _commit(self, key: tuple[str, str], delta: Delta) -> Delta:
        # Caller holds the lock.
        if self.journal is not None:
            self.journal.append(delta.to_record())
        self.deltas.append(delta)
        self._outcomes[key] = delta.seq
        for sink in self._subscribers:
            sink.put(delta)
        return delta

    def wake_subscribers(self) -> None:
        """Push the shutdown sentinel so streaming threads can exit."""
        with self._lock:
            for sink in self._subscribers:
                sink.put(None)

    # -- the read path -----------------------------------------------------------

    def checkout(self) -> dict:
        """State image a new replica boots from."""
        with self._lock:
            return {
                "seq": self.seq,
                "digest": self.state.digest(),
                "state": self.state.state_dict(),
                "topology": self.state.topology.to_dict(),
            }

    def delta_records(self, from_seq: int, to_seq: int | None = None) -> list[dict]:
        with self._lock:
            end = self.seq if to_seq is None else min(to_seq, self.seq)
            return [d.to_record() for d in self.deltas[max(from_seq, 1) - 1 : end]]

    def attach(self, from_seq: int) -> tuple[queue.SimpleQueue, list[Delta]]:
        """Register a live subscriber; returns (queue, backlog >= from_seq).

        Registration and backlog capture happen under the write lock, so the
        caller sees every delta exactly once: the backlog first, then the
        queue (skipping queue entries below its own high-water mark).
        """
        with self._lock:
            sink: queue.SimpleQueue = queue.SimpleQueue()
            self._subscribers.append(sink)
            backlog = list(self.deltas[max(from_seq, 1) - 1 :])
            return sink, backlog

    def detach(self, sink: queue.SimpleQueue) -> None:
        with self._lock:
            try:
                self._subscribers.remove(sink)
            except ValueError:
                pass

    # -- the manager stream slot ---------------------------------------------

    def claim_manager_stream(self) -> bool:
        with self._lock:
            if self._manager_stream_busy:
                return False
            self._manager_stream_busy = True
            return True

    def release_manager_stream(self) -> None:
        with self._lock:
            self._manager_stream_busy = False

    def close(self) -> None:
        if self.journal is not None:
            self.journal.close()


# ---------------------------------------------------------------------------
# HTTP transport


class BoardRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "bigboard"

    # Handlers run on daemon threads; default stderr logging just adds noise.
    def log_message(self, format: str, *args) -> None:
        pass

    @property
    def board(self) -> BoardServer:
        return self.server.board

    # -- plumbing -----------------------------------------------------------

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _fail(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _role(self) -> Role | None:
        header = self.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            return None
        token = header[len("Bearer ") :].strip()
        if token and token == self.server.manager_token:
            return Role.MANAGER
        if token and token == self.server.member_token:
            return Role.MEMBER
        return None

    def _read_body(self) -> bytes | None:
        length = self.headers.get("Content-Length")
        if length is None:
            self._fail(411, "Content-Length required")
            return None
        try:
            return self.rfile.read(int(length))
        except ValueError:
            self._fail(400, "bad Content-Length")
            return None

    # -- routes ---------------------------------------------------------------

    def do_GET(self) -> None:
        url = urlparse(self.path)
        if url.path == "/health":
            self._send_json(200, {"status": "ok", "seq": self.board.seq})
            return
        role = self._role()
        if role is None:
            self._fail(401, "missing or unknown bearer token")
            return
        if url.path == "/snapshot":
            self._send_json(200, self.board.checkout())
        elif url.path == "/deltas":
            self._stream_deltas(url, role)
        else:
            self._fail(404, f"no route {url.path!r}")

    def do_POST(self) -> None:
        url = urlparse(self.path)
        role = self._role()
        if role is None:
            self._fail(401, "missing or unknown bearer token")
            return
        body = self._read_body()
        if body is None:
            return
        if url.path == "/command":
            self._submit_one(body, role)
        elif url.path == "/commands":
            self._submit_batch(body, role)
        else:
            self._fail(404, f"no route {url.path!r}")

    # -- submission -------------------------------------------------------------

    def _parse_command(self, raw: object, role: Role) -> Command:
        """Build the Command, stamping the issuer role from the bearer token.

        A record may spell the role out; if it disagrees with the token the
        submission is rejected (and sequenced) as an authorization failure.
        """
        if not isinstance(raw, dict):
            raise ValidationError("command must be an object")
        issuer = raw.get("issuer")
        if isinstance(issuer, dict) and "role" not in issuer:
            issuer = dict(issuer)
            issuer["role"] = role.value
            raw = dict(raw)
            raw["issuer"] = issuer
        command = Command.from_record(raw)
        if command.issuer.role is not role:
            raise AuthorizationError(
                f"issuer claims role {command.issuer.role.value!r} but the "
                f"token grants {role.value!r}"
            )
        return command

    def _sequence(self, raw: object, role: Role) -> tuple[Delta, bool]:
        """Parse and submit one record; role mismatches are sequenced as
        authorization rejections so the console still gets an audit record."""
        try:
            command = self._parse_command(raw, role)
        except AuthorizationError as exc:
            return self.board.submit_rejected(
                Command.from_record(raw), exc.reason_code, str(exc)
            )
        return self.board.submit(command)

    def _submit_one(self, body: bytes, role: Role) -> None:
        try:
            raw = json.loads(body)
        except ValueError:
            self._fail(400, "body is not valid JSON")
            return
        try:
            delta, created = self._sequence(raw, role)
        except ValidationError as exc:
            self._fail(400, str(exc))
            return
        self._send_json(200, {"delta": delta.to_record(), "duplicate": not created})

    def _submit_batch(self, body: bytes, role: Role) -> None:
        results = []
        for line in body.splitlines():
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except ValueError as exc:
                results.append({"error": f"bad JSON line: {exc}"})
                continue
            try:
                delta, created = self._sequence(raw, role)
            except ValidationError as exc:
                results.append({"error": str(exc)})
                continue
            results.append({"delta": delta.to_record(), "duplicate": not created})
        self._send_json(200, {"results": results})

    # -- streaming ------------------------------------------------------------

    def _stream_deltas(self, url, role: Role) -> None:
        params = parse_qs(url.query)
        try:
            from_seq = int(params.get("from", ["1"])[0])
        except ValueError:
            self._fail(400, "'from' must be an integer sequence number")
            return
        if from_seq < 1:
            self._fail(400, "'from' must be >= 1")
            return
        holds_manager_slot = False
        if role is Role.MANAGER:
            if not self.board.claim_manager_stream():
                self._fail(409, "another manager console is already streaming")
                return
            holds_manager_slot = True
        sink, backlog = self.board.attach(from_seq)
        try:
            self.send_response(200)
            self.send_header("Content-Type", "application/x-ndjson")
            self.send_header("Connection", "close")
            self.end_headers()
            high_water = from_seq - 1
            for delta in backlog:
                self.wfile.write(_delta_line(delta))
                high_water = delta.seq
            self.wfile.flush()
            while True:
                delta = sink.get()
                if delta is None:  # server shutdown sentinel
                    break
                if delta.seq <= high_water:
                    continue
                self.wfile.write(_delta_line(delta))
                self.wfile.flush()
                high_water = delta.seq
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            self.board.detach(sink)
            if holds_manager_slot:
                self.board.release_manager_stream()
            self.close_connection = True


def _delta_line(delta: Delta) -> bytes:
    return json.dumps(delta.to_record()).encode("utf-8") + b"\n"


class BoardHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(
        self,
        address: tuple[str, int],
        board: BoardServer,
        manager_token: str,
        member_token: str,
    ):
        super().__init__(address, BoardRequestHandler)
        self.board = board
        self.manager_token = manager_token
        self.member_token = member_token

    def shutdown(self) -> None:
        self.board.wake_subscribers()
        super().shutdown()
