"""Client-side view of the board: HTTP access plus a converging replica.

``BoardClient`` speaks the server's HTTP surface over a persistent
connection. ``LocalBoard`` is the replica every console keeps: it boots
from a snapshot checkout and folds in the totally ordered delta stream,
verifying the server's digest after every step so divergence is caught at
the first bad delta rather than discovered later.
"""

from __future__ import annotations

import http.client
import json
import uuid
from typing import Iterator, Mapping

from .errors import (
    BigBoardError,
    DeltaGapError,
    ReplicaDivergence,
    ValidationError,
)
from .server import Delta
from .state import BoardState, Command
from .topology import Topology, load_topology


class ServerUnavailable(BigBoardError):
    """The board server could not be reached or answered malformed data."""


def _split_address(addr: str) -> tuple[str, int]:
    addr = addr.removeprefix("http://")
    host, _, port = addr.partition(":")
    if not host or not port:
        raise ValidationError(f"address {addr!r} must look like host:port")
    try:
        return host, int(port)
    except ValueError:
        raise ValidationError(f"address {addr!r} has a non-numeric port") from None


class BoardClient:
    """Thin HTTP client: snapshot checkout, command submission, delta stream."""

    def __init__(self, addr: str, token: str, client_id: str, timeout: float = 10.0):
        self.host, self.port = _split_address(addr)
        self.token = token
        self.client_id = client_id
        self.timeout = timeout
        self._conn: http.client.HTTPConnection | None = None

    # -- plumbing ------------------------------------------------------------

    def _connection(self) -> http.client.HTTPConnection:
        if self._conn is None:
            self._conn = http.client.HTTPConnection(
                self.host, self.port, timeout=self.timeout
            )
        return self._conn

    def _headers(self) -> dict:
        return {
            "Authorization": f"Bearer {self.token}",
            "Content-Type": "application/json",
        }

    def _request(self, method: str, path: str, body: bytes | None = None) -> tuple[int, dict]:
        for attempt in (1, 2):
            conn = self._connection()
            try:
                conn.request(method, path, body=body, headers=self._headers())
                response = conn.getresponse()
                payload = response.read()
                break
            except (OSError, http.client.HTTPException) as exc:
                # A server restart kills the kept-alive socket; retry once
                # on a fresh connection before giving up.
                self.close()
                if attempt == 2:
                    raise ServerUnavailable(
                        f"{method} {path} failed: {exc}"
                    ) from exc
        try:
            return response.status, json.loads(payload) if payload else {}
        except ValueError:
            raise ServerUnavailable(
                f"{method} {path} returned non-JSON body"
            ) from None

    def close(self) -> None:
        if self._conn is not None:
            self._conn.close()
            self._conn = None

    # -- calls ---------------------------------------------------------------

    def health(self) -> dict:
        status, body = self._request("GET", "/health")
        if status != 200:
            raise ServerUnavailable(f"health check returned {status}")
        return body

    def snapshot(self) -> dict:
        status, body = self._request("GET", "/snapshot")
        if status != 200:
            raise ServerUnavailable(
                f"snapshot returned {status}: {body.get('error', '')}"
            )
        return body

    def make_command(
        self,
        kind: str,
        payload: Mapping,
        at: int,
        command_id: str | None = None,
        role: str | None = None,
    ) -> dict:
        issuer: dict = {"client_id": self.client_id}
        if role is not None:
            issuer["role"] = role
        return {
            "command_id": command_id or uuid.uuid4().hex,
            "issuer": issuer,
            "kind": kind,
            "payload": dict(payload),
            "at": at,
        }

    def submit_record(self, record: Mapping) -> dict:
        """POST one command; returns {"delta": ..., "duplicate": bool}.

        Raises ServerUnavailable for transport trouble and ValidationError
        for 4xx answers; a rejected-but-sequenced command is a normal return
        (inspect delta["outcome"]).
        """
        body = json.dumps(dict(record)).encode("utf-8")
        status, answer = self._request("POST", "/command", body)
        if status == 200:
            return answer
        raise ValidationError(f"server answered {status}: {answer.get('error', '')}")

    def submit_batch(self, records: list[Mapping]) -> list[dict]:
        body = b"\n".join(json.dumps(dict(r)).encode("utf-8") for r in records)
        status, answer = self._request("POST", "/commands", body)
        if status != 200:
            raise ValidationError(f"server answered {status}: {answer.get('error', '')}")
        return answer["results"]

    def stream_deltas(self, from_seq: int = 1) -> Iterator[dict]:
        """Yield delta records live from /deltas. Uses its own connection;
        runs until the server closes the stream or the caller stops."""
        conn = http.client.HTTPConnection(self.host, self.port, timeout=self.timeout)
        try:
            conn.request("GET", f"/deltas?from={from_seq}", headers=self._headers())
            response = conn.getresponse()
            if response.status != 200:
                detail = response.read().decode("utf-8", "replace")
                raise ServerUnavailable(
                    f"delta stream refused with {response.status}: {detail}"
                )
            buffer = b""
            while True:
                chunk = response.read1(65536)
                if not chunk:
                    return
                buffer += chunk
                while True:
                    line, sep, rest = buffer.partition(b"\n")
                    if not sep:
                        break
                    buffer = rest
                    if line.strip():
                        yield json.loads(line)
        finally:
            conn.close()


class LocalBoard:
    """A console's replica of the authoritative state.

    Boots from a snapshot checkout and applies deltas in order. Sequence
    gaps and digest mismatches raise immediately; both mean the replica can
    no longer be trusted and must re-checkout.
    """

    def __init__(self, topology: Topology, state: BoardState, seq: int):
        self.topology = topology
        self.state = state
        self.seq = seq

    @classmethod
    def from_snapshot(cls, snapshot: Mapping) -> "LocalBoard":
        topology = load_topology(snapshot["topology"])
        state = BoardState.from_state_dict(topology, snapshot["state"])
        board = cls(topology=topology, state=state, seq=int(snapshot["seq"]))
        if state.digest() != snapshot["digest"]:
            raise ReplicaDivergence(
                "snapshot digest does not match the restored state"
            )
        return board

    @classmethod
    def fresh(cls, topology: Topology) -> "LocalBoard":
        """An empty replica at seq 0, for following a journal from the top."""
        return cls(topology=topology, state=BoardState(topology), seq=0)

    def apply_delta(self, record: Mapping) -> Delta | None:
        """Fold in one delta record. Returns the Delta, or None if it was
        an already-applied duplicate (at or below our sequence)."""
        delta = Delta.from_record(record)
        if delta.seq <= self.seq:
            return None
        if delta.seq != self.seq + 1:
            raise DeltaGapError(
                f"expected delta {self.seq + 1}, got {delta.seq}; re-checkout needed"
            )
        if delta.accepted:
            self.state.apply(Command.from_record(delta.command))
        self.seq = delta.seq
        digest = self.state.digest()
        if digest != delta.digest:
            raise ReplicaDivergence(
                f"digest mismatch at seq {delta.seq}: replica {digest[:12]}..., "
                f"server {delta.digest[:12]}..."
            )
        return delta

    def digest(self) -> str:
        return self.state.digest()
