"""Authoritative board state and the command vocabulary that mutates it.

Every change to the shared board travels as a Command record. Commands are
validated and applied one at a time; a command either applies atomically or
raises CommandRejected and leaves the state untouched. Replicas that apply
the same accepted commands in the same order converge bit for bit, which is
checked by comparing canonical digests.

The canonical encoding is JSON with sorted keys, compact separators, and
ASCII escaping, containing only strings, integers, booleans, and nulls.
``canonical_state_json`` assembles the document from per-entity cached
fragments; it is defined to equal ``json.dumps(state_dict(), sort_keys=True,
separators=(",", ":"))`` exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from hashlib import sha256
from typing import Mapping

from .alerts import (
    Alert,
    AlertCategory,
    AlertStatus,
    AlertStore,
    Subject,
    SubjectKind,
    Ticket,
    TicketState,
    classify_mission_impact,
)
from .errors import AuthorizationError, QueryError, ValidationError
from .overlay import (
    BoardLayers,
    BoardView,
    activate_mission,
    activate_query,
    deactivate_mission,
    deactivate_query,
    derive_layers,
)
from .pipes import Pipe, PipeStore, quantize_fraction
from .query import FunctionalQuery, parse_query
from .topology import Topology

# Pipe ids are allocated from the shared counter; user-chosen alert ids may
# not squat on that namespace or a later ReportFlow could be wedged forever.
RESERVED_ID_PREFIX = "pipe-"


class CommandKind(str, Enum):
    RAISE_ALERT = "RaiseAlert"
    TASK_ALERT = "TaskAlert"
    RESOLVE_ALERT = "ResolveAlert"
    REPORT_FLOW = "ReportFlow"
    ACTIVATE_MISSION = "ActivateMission"
    DEACTIVATE_MISSION = "DeactivateMission"
    SAVE_QUERY = "SaveQuery"
    ACTIVATE_QUERY = "ActivateQuery"
    DEACTIVATE_QUERY = "DeactivateQuery"
    ADD_TICKET_NOTE = "AddTicketNote"


# Board-wide view toggles; these change what every console renders, so only
# the manager console may issue them.
VIEW_CONTROL_KINDS = frozenset(
    {
        CommandKind.ACTIVATE_MISSION.value,
        CommandKind.DEACTIVATE_MISSION.value,
        CommandKind.SAVE_QUERY.value,
        CommandKind.ACTIVATE_QUERY.value,
        CommandKind.DEACTIVATE_QUERY.value,
    }
)

_ALL_KINDS = frozenset(k.value for k in CommandKind)


class Role(str, Enum):
    MANAGER = "manager"
    MEMBER = "member"


@dataclass(frozen=True)
class ClientIdentity:
    client_id: str
    role: Role

    def to_dict(self) -> dict:
        return {"client_id": self.client_id, "role": self.role.value}

    @staticmethod
    def from_dict(raw: object) -> "ClientIdentity":
        if not isinstance(raw, Mapping):
            raise ValidationError("issuer must be an object")
        client_id = raw.get("client_id")
        if not isinstance(client_id, str) or not client_id:
            raise ValidationError("issuer.client_id must be a non-empty string")
        role = raw.get("role")
        try:
            parsed = Role(role)
        except ValueError:
            raise ValidationError(f"unknown issuer role {role!r}") from None
        return ClientIdentity(client_id=client_id, role=parsed)


@dataclass(frozen=True)
class Command:
    """One intended mutation, as it appears on the wire and in the journal.

    ``kind`` stays a plain string so that a record with an unknown kind can
    still round-trip through validation and be rejected deterministically.
    """

    command_id: str
    issuer: ClientIdentity
    kind: str
    payload: Mapping
    at: int

    def to_record(self) -> dict:
        return {
            "command_id": self.command_id,
            "issuer": self.issuer.to_dict(),
            "kind": self.kind,
            "payload": dict(self.payload),
            "at": self.at,
        }

    @staticmethod
    def from_record(raw: object) -> "Command":
        if not isinstance(raw, Mapping):
            raise ValidationError("command must be an object")
        command_id = raw.get("command_id")
        if not isinstance(command_id, str) or not command_id:
            raise ValidationError("command_id must be a non-empty string")
        issuer = ClientIdentity.from_dict(raw.get("issuer"))
        kind = raw.get("kind")
        if not isinstance(kind, str):
            raise ValidationError("kind must be a string")
        payload = raw.get("payload")
        if not isinstance(payload, Mapping):
            raise ValidationError("payload must be an object")
        at = raw.get("at")
        if not isinstance(at, int) or isinstance(at, bool):
            raise ValidationError("at must be an integer timestamp (ms)")
        return Command(
            command_id=command_id,
            issuer=issuer,
            kind=kind,
            payload=dict(payload),
            at=at,
        )


def sha256_hex(text: str) -> str:
    return sha256(text.encode("utf-8")).hexdigest()


def _need_str(payload: Mapping, key: str, kind: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str) or not value:
        raise ValidationError(f"{kind} payload needs a non-empty string {key!r}")
    return value


def _need_number(payload: Mapping, key: str, kind: str) -> float:
    value = payload.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{kind} payload needs a number {key!r}")
    return value


class BoardState:
    """The full mutable board: alerts, pipes, queries, and the shared view.

    All mutation goes through :meth:`apply`. Validation happens before any
    store is touched so a rejected command cannot leave partial effects.
    """

    def __init__(self, topology: Topology):
        self.topology = topology
        self.alerts = AlertStore()
        self.pipes = PipeStore()
        self.queries: dict[str, FunctionalQuery] = {}
        self.view = BoardView()
        self.pipe_seq = 0

    # -- command application ------------------------------------------------

    def apply(self, command: Command) -> None:
        kind = command.kind
        if kind not in _ALL_KINDS:
            raise ValidationError(f"unknown command kind {kind!r}")
        if kind in VIEW_CONTROL_KINDS and command.issuer.role is not Role.MANAGER:
            raise AuthorizationError(
                f"{kind} changes the shared view and requires the manager role"
            )
        handler = getattr(self, "_apply_" + CommandKind(kind).name.lower())
        handler(command.payload, command.issuer, command.at)

    def _apply_raise_alert(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        kind = CommandKind.RAISE_ALERT.value
        alert_id = _need_str(payload, "alert_id", kind)
        if alert_id.startswith(RESERVED_ID_PREFIX):
            raise ValidationError(
                f"alert ids starting with {RESERVED_ID_PREFIX!r} are reserved for flow pipes"
            )
        raw_category = _need_str(payload, "category", kind)
        try:
            category = AlertCategory(raw_category)
        except ValueError:
            raise ValidationError(f"unknown alert category {raw_category!r}") from None
        subject = Subject.from_dict(payload.get("subject"))
        summary = _need_str(payload, "summary", kind)
        self._check_subject(subject)
        alert = Alert(
            id=alert_id,
            category=category,
            status=AlertStatus.UNASSIGNED,
            subject=subject,
            summary=summary,
            raised_at=at,
            status_changed_at=at,
            primary_mission=classify_mission_impact(
                subject, self.topology, self.pipes.endpoint_map
            ),
        )
        self.alerts.add(alert)

    def _check_subject(self, subject: Subject) -> None:
        if subject.kind is SubjectKind.ASSET:
            if subject.ref not in self.topology.assets_by_id:
                raise ValidationError(f"unknown asset {subject.ref!r}")
        elif subject.kind is SubjectKind.SUBZONE:
            if subject.ref not in self.topology.sub_zones_by_id:
                raise ValidationError(f"unknown sub-zone {subject.ref!r}")
        else:
            if self.pipes.get(subject.ref) is None:
                raise ValidationError(f"no live pipe {subject.ref!r}")

    def _apply_task_alert(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        kind = CommandKind.TASK_ALERT.value
        self.alerts.task(
            alert_id=_need_str(payload, "alert_id", kind),
            ticket_id=_need_str(payload, "ticket_id", kind),
            assignee=_need_str(payload, "assignee", kind),
            at=at,
        )

    def _apply_resolve_alert(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        alert_id = _need_str(payload, "alert_id", CommandKind.RESOLVE_ALERT.value)
        self.alerts.resolve(alert_id, at=at)
        pipe = self.pipes.pipe_for_alert(alert_id)
        if pipe is not None:
            self.pipes.remove(pipe.id)

    def _apply_report_flow(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        kind = CommandKind.REPORT_FLOW.value
        endpoint_a = _need_str(payload, "endpoint_a", kind)
        endpoint_b = _need_str(payload, "endpoint_b", kind)
        for endpoint in (endpoint_a, endpoint_b):
            if endpoint not in self.topology.sub_zones_by_id:
                raise ValidationError(f"unknown sub-zone {endpoint!r}")
        if endpoint_a == endpoint_b:
            raise ValidationError("a pipe needs two distinct endpoints")
        available_bp = quantize_fraction(
            _need_number(payload, "available_fraction", kind), "available_fraction"
        )
        current_bp = quantize_fraction(
            _need_number(payload, "current_fraction", kind), "current_fraction"
        )
        existing = self.pipes.find_by_pair(endpoint_a, endpoint_b)
        if existing is not None:
            self.pipes.update_bands(existing.id, available_bp, current_bp)
            return
        pipe_id = f"pipe-{self.pipe_seq + 1}"
        alert_id = f"{pipe_id}.alert"
        # Both ids are derived from a never-reused counter, but stay defensive:
        # the whole command must reject before any store mutates.
        if self.alerts.get(alert_id) is not None:
            raise ValidationError(f"duplicate alert id {alert_id!r}")
        self.pipe_seq += 1
        pipe = Pipe(
            id=pipe_id,
            endpoint_a=endpoint_a,
            endpoint_b=endpoint_b,
            available_bp=available_bp,
            current_bp=current_bp,
            alert_id=alert_id,
        )
        self.pipes.add(pipe)
        subject = Subject(kind=SubjectKind.PIPE, ref=pipe_id)
        self.alerts.add(
            Alert(
                id=alert_id,
                category=AlertCategory.PERFORMANCE,
                status=AlertStatus.UNASSIGNED,
                subject=subject,
                summary=f"degraded flow between {endpoint_a} and {endpoint_b}",
                raised_at=at,
                status_changed_at=at,
                primary_mission=classify_mission_impact(
                    subject, self.topology, self.pipes.endpoint_map
                ),
            )
        )

    def _apply_activate_mission(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        mission_id = _need_str(payload, "mission_id", CommandKind.ACTIVATE_MISSION.value)
        self.view = activate_mission(self.view, mission_id, self.topology)

    def _apply_deactivate_mission(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        mission_id = _need_str(payload, "mission_id", CommandKind.DEACTIVATE_MISSION.value)
        self.view = deactivate_mission(self.view, mission_id, self.topology)

    def _apply_save_query(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        kind = CommandKind.SAVE_QUERY.value
        query_id = _need_str(payload, "query_id", kind)
        label = _need_str(payload, "label", kind)
        color = _need_str(payload, "color", kind)
        try:
            expression = parse_query(_need_str(payload, "expression", kind))
        except QueryError as exc:
            raise ValidationError(f"bad query expression: {exc}") from None
        for mission in self.topology.missions:
            if mission.color == color:
                raise ValidationError(
                    f"color {color!r} is taken by mission {mission.id!r}"
                )
        for other in self.queries.values():
            if other.id != query_id and other.color == color:
                raise ValidationError(f"color {color!r} is taken by query {other.id!r}")
        previous = self.queries.get(query_id)
        self.queries[query_id] = FunctionalQuery(
            id=query_id,
            label=label,
            expression=expression,
            color=color,
            active=previous.active if previous is not None else False,
        )

    def _apply_activate_query(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        query_id = _need_str(payload, "query_id", CommandKind.ACTIVATE_QUERY.value)
        self.view = activate_query(self.view, self.queries, query_id)
        self.queries[query_id] = replace(self.queries[query_id], active=True)

    def _apply_deactivate_query(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        query_id = _need_str(payload, "query_id", CommandKind.DEACTIVATE_QUERY.value)
        self.view = deactivate_query(self.view, self.queries, query_id)
        self.queries[query_id] = replace(self.queries[query_id], active=False)

    def _apply_add_ticket_note(self, payload: Mapping, issuer: ClientIdentity, at: int) -> None:
        kind = CommandKind.ADD_TICKET_NOTE.value
        alert_id = _need_str(payload, "alert_id", kind)
        text = _need_str(payload, "note", kind)
        author = payload.get("author")
        if author is None:
            author = issuer.client_id
        elif not isinstance(author, str) or not author:
            raise ValidationError(f"{kind} payload needs a non-empty string 'author'")
        self.alerts.note(alert_id, author=author, text=text, at=at)

    # -- canonical encoding --------------------------------------------------

    def _referenced_gone_pipes(self) -> list[str]:
        """Ids of pipes referenced by live alerts but no longer live."""
        live = {p.id for p in self.pipes.live_pipes()}
        gone = {
            a.subject.ref
            for a in self.alerts.live_alerts()
            if a.subject.kind is SubjectKind.PIPE and a.subject.ref not in live
        }
        return sorted(gone)

    def state_dict(self) -> dict:
        """Plain-dict image of the state; the reference for the canonical form."""
        endpoints = self.pipes.endpoint_map
        return {
            "alerts": [a.to_dict() for a in sorted(self.alerts.live_alerts(), key=lambda a: a.id)],
            "counters": {"pipe_seq": self.pipe_seq},
            "pipe_refs": {
                pid: sorted(endpoints[pid]) for pid in self._referenced_gone_pipes()
            },
            "pipes": [p.to_dict() for p in sorted(self.pipes.live_pipes(), key=lambda p: p.id)],
            "queries": [self.queries[qid].to_dict() for qid in sorted(self.queries)],
            "tickets": [t.to_dict() for t in sorted(self.alerts.open_tickets(), key=lambda t: t.id)],
            "topology": self.topology.digest,
            "view": self.view.to_dict(),
        }

    def canonical_state_json(self) -> str:
        endpoints = self.pipes.endpoint_map
        parts = ['{"alerts":[']
        parts.append(",".join(a.canonical for a in sorted(self.alerts.live_alerts(), key=lambda a: a.id)))
        parts.append('],"counters":{"pipe_seq":%d},"pipe_refs":{' % self.pipe_seq)
        parts.append(
            ",".join(
                '"%s":%s' % (pid, json.dumps(sorted(endpoints[pid]), separators=(",", ":")))
                for pid in self._referenced_gone_pipes()
            )
        )
        parts.append('},"pipes":[')
        parts.append(",".join(p.canonical for p in sorted(self.pipes.live_pipes(), key=lambda p: p.id)))
        parts.append('],"queries":[')
        parts.append(",".join(self.queries[qid].canonical for qid in sorted(self.queries)))
        parts.append('],"tickets":[')
        parts.append(",".join(t.canonical for t in sorted(self.alerts.open_tickets(), key=lambda t: t.id)))
        parts.append('],"topology":"%s","view":' % self.topology.digest)
        parts.append(json.dumps(self.view.to_dict(), sort_keys=True, separators=(",", ":")))
        parts.append("}")
        return "".join(parts)

    def digest(self) -> str:
        return sha256_hex(self.canonical_state_json())

    # -- snapshot round-trip ---------------------------------------------------

    @staticmethod
    def from_state_dict(topology: Topology, state: Mapping) -> "BoardState":
        """Rebuild a replica from a snapshot image.

        Only live entities are carried by snapshots; a replica rebuilt this
        way produces the same canonical digest and applies accepted commands
        identically, though it cannot re-run rejections that depended on
        resolved history (it never needs to: rejections are never replayed).
        """
        if state.get("topology") != topology.digest:
            raise ValidationError("snapshot topology digest does not match")
        board = BoardState(topology)
        board.pipe_seq = int(state["counters"]["pipe_seq"])
        for pid, pair in state.get("pipe_refs", {}).items():
            board.pipes.register_endpoints(pid, pair[0], pair[1])
        for raw in state["pipes"]:
            board.pipes.add(
                Pipe(
                    id=raw["id"],
                    endpoint_a=raw["endpoint_a"],
                    endpoint_b=raw["endpoint_b"],
                    available_bp=raw["available_bp"],
                    current_bp=raw["current_bp"],
                    alert_id=raw["alert_id"],
                )
            )
        for raw in state["alerts"]:
            board.alerts.add(
                Alert(
                    id=raw["id"],
                    category=AlertCategory(raw["category"]),
                    status=AlertStatus(raw["status"]),
                    subject=Subject.from_dict(raw["subject"]),
                    summary=raw["summary"],
                    raised_at=raw["raised_at"],
                    status_changed_at=raw["status_changed_at"],
                    ticket_id=raw["ticket_id"],
                    primary_mission=raw["primary_mission"],
                )
            )
        for raw in state["tickets"]:
            board.alerts.restore_ticket(
                Ticket(
                    id=raw["id"],
                    alert_id=raw["alert_id"],
                    assignee=raw["assignee"],
                    notes=tuple(dict(n) for n in raw["notes"]),
                    state=TicketState(raw["state"]),
                )
            )
        for raw in state["queries"]:
            board.queries[raw["id"]] = FunctionalQuery(
                id=raw["id"],
                label=raw["label"],
                expression=parse_query(raw["expression"]),
                color=raw["color"],
                active=raw["active"],
            )
        board.view = BoardView.from_dict(state["view"])
        return board

    # -- derived rendering ----------------------------------------------------

    def layers(self) -> BoardLayers:
        return derive_layers(
            topology=self.topology,
            live_alerts=self.alerts.live_alerts(),
            live_pipes=self.pipes.live_pipes(),
            queries=self.queries,
            pipe_endpoints=self.pipes.endpoint_map,
            view=self.view,
        )
