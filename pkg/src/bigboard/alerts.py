"""Alert lifecycle, ticket binding, aggregation, and mission-impact scoring.

Every problem on the board is an Alert in one of three categories (health,
security, performance) moving through a one-way lifecycle:

    unassigned (red) -> tasked (yellow) -> resolved (off the board)

with a shortcut unassigned -> resolved for dismissing false positives.
Tasking binds exactly one ticket; resolving a tasked alert closes it.
Resolved alerts leave the live set but stay in the history journal.

Alerts point at a subject: a single asset, a whole sub-zone, or a flow
pipe. The subject determines which assets the problem affects, which in
turn drives the aggregate badge counts and the "most affected mission"
classification shown in the warning menu capsules.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from .errors import TransitionError, ValidationError
from .topology import Topology


class AlertCategory(str, Enum):
    HEALTH = "health"
    SECURITY = "security"
    PERFORMANCE = "performance"

    @property
    def badge_icon(self) -> str:
        return _BADGE_ICONS[self]


_BADGE_ICONS = {
    AlertCategory.HEALTH: "heart",
    AlertCategory.SECURITY: "shield",
    AlertCategory.PERFORMANCE: "speedometer",
}


class AlertStatus(str, Enum):
    UNASSIGNED = "unassigned"
    TASKED = "tasked"
    RESOLVED = "resolved"

    @property
    def flag_color(self) -> str | None:
        """Board color of this status; resolved alerts are not drawn."""
        if self is AlertStatus.UNASSIGNED:
            return "red"
        if self is AlertStatus.TASKED:
            return "yellow"
        return None


class SubjectKind(str, Enum):
    ASSET = "asset"
    SUBZONE = "subzone"
    PIPE = "pipe"


@dataclass(frozen=True)
class Subject:
    kind: SubjectKind
    ref: str

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "ref": self.ref}

    @classmethod
    def from_dict(cls, data: dict) -> "Subject":
        try:
            kind = SubjectKind(data["kind"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError(f"bad subject {data!r}") from None
        ref = data.get("ref")
        if not isinstance(ref, str) or not ref:
            raise ValidationError(f"bad subject {data!r}")
        return cls(kind, ref)


@dataclass(frozen=True)
class Alert:
    id: str
    category: AlertCategory
    status: AlertStatus
    subject: Subject
    summary: str
    raised_at: int
    status_changed_at: int
    ticket_id: str | None = None
    primary_mission: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "category": self.category.value,
            "status": self.status.value,
            "subject": self.subject.to_dict(),
            "summary": self.summary,
            "raised_at": self.raised_at,
            "status_changed_at": self.status_changed_at,
            "ticket_id": self.ticket_id,
            "primary_mission": self.primary_mission,
        }

    @cached_property
    def canonical(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


class TicketState(str, Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class Ticket:
    id: str
    alert_id: str
    assignee: str
    notes: tuple[dict, ...] = ()  # {"at": int, "author": str, "text": str}
    state: TicketState = TicketState.OPEN

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "alert_id": self.alert_id,
            "assignee": self.assignee,
            "notes": list(self.notes),
            "state": self.state.value,
        }

    @cached_property
    def canonical(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class AggregateBadge:
    """Red/yellow live-alert counts rolled up into one sub-zone oval."""

    sub_zone_id: str
    red_count: int
    yellow_count: int


# ---------------------------------------------------------------------------
# Pure classification helpers


def affected_assets(
    subject: Subject,
    topology: Topology,
    pipe_endpoints: Mapping[str, tuple[str, str]],
) -> frozenset[str]:
    """Assets degraded by a problem on the given subject.

    Asset subjects affect themselves, sub-zone subjects everything they
    contain, and pipe subjects the union of both endpoint sub-zones.
    """
    if subject.kind is SubjectKind.ASSET:
        if subject.ref not in topology.assets_by_id:
            raise ValidationError(f"unknown asset '{subject.ref}'")
        return frozenset((subject.ref,))
    if subject.kind is SubjectKind.SUBZONE:
        sz = topology.sub_zones_by_id.get(subject.ref)
        if sz is None:
            raise ValidationError(f"unknown subzone '{subject.ref}'")
        return sz.asset_ids
    pair = pipe_endpoints.get(subject.ref)
    if pair is None:
        raise ValidationError(f"unknown pipe '{subject.ref}'")
    a, b = pair
    return topology.sub_zones_by_id[a].asset_ids | topology.sub_zones_by_id[b].asset_ids


def classify_mission_impact(
    subject: Subject,
    topology: Topology,
    pipe_endpoints: Mapping[str, tuple[str, str]],
) -> str | None:
    """Mission most affected by a problem on the subject.

    Measured as the largest overlap between the subject's affected assets
    and each mission's dependency set; ties go to the lower mission rank.
    Returns None when no mission is touched at all.
    """
    affected = affected_assets(subject, topology, pipe_endpoints)
    best_id: str | None = None
    best_count = 0
    for mission in sorted(topology.missions, key=lambda m: m.rank):
        count = len(affected & mission.dependency_asset_ids)
        if count > best_count:
            best_id, best_count = mission.id, count
    return best_id


def subject_sub_zone(subject: Subject, topology: Topology) -> str | None:
    """Sub-zone a non-pipe alert rolls up into; None for pipe subjects."""
    if subject.kind is SubjectKind.ASSET:
        return topology.assets_by_id[subject.ref].sub_zone_id
    if subject.kind is SubjectKind.SUBZONE:
        return subject.ref
    return None


def aggregate_badges(live_alerts: Iterable[Alert], topology: Topology) -> list[AggregateBadge]:
    """Per-sub-zone red/yellow counts, in panel layout order.

    Pipe-subject alerts are excluded: they render as pipes, not ovals.
    Sub-zones with no live alerts produce no badge.
    """
    counts: dict[str, list[int]] = {}
    for alert in live_alerts:
        sz = subject_sub_zone(alert.subject, topology)
        if sz is None:
            continue
        pair = counts.setdefault(sz, [0, 0])
        if alert.status is AlertStatus.UNASSIGNED:
            pair[0] += 1
        elif alert.status is AlertStatus.TASKED:
            pair[1] += 1
    ordered = sorted(counts, key=topology.layout_key)
    return [AggregateBadge(sz, counts[sz][0], counts[sz][1]) for sz in ordered]


# ---------------------------------------------------------------------------
# The alert/ticket registry


class AlertStore:
    """Holds every alert ever raised plus the open-ticket registry.

    Mutations go through the three lifecycle methods and note();
    all of them validate preconditions before touching state, so a
    rejected call leaves the store exactly as it was.
    """

    def __init__(self):
        self._history: dict[str, Alert] = {}
        self._live: dict[str, Alert] = {}
        self._tickets: dict[str, Ticket] = {}  # open tickets by ticket id
        self._ticket_by_alert: dict[str, str] = {}
        self._closed_tickets: dict[str, Ticket] = {}

    # -- queries ------------------------------------------------------

    def live_alerts(self) -> list[Alert]:
        return list(self._live.values())

    def get_live(self, alert_id: str) -> Alert | None:
        return self._live.get(alert_id)

    def get(self, alert_id: str) -> Alert | None:
        return self._history.get(alert_id)

    @property
    def history_len(self) -> int:
        return len(self._history)

    def open_tickets(self) -> list[Ticket]:
        return list(self._tickets.values())

    def ticket_for_alert(self, alert_id: str) -> Ticket | None:
        tid = self._ticket_by_alert.get(alert_id)
        if tid is None:
            return None
        return self._tickets.get(tid) or self._closed_tickets.get(tid)

    # -- lifecycle ----------------------------------------------------

    def add(self, alert: Alert) -> Alert:
        if alert.id in self._history:
            raise ValidationError(f"duplicate alert id '{alert.id}'")
        self._history[alert.id] = alert
        self._live[alert.id] = alert
        return alert

    def restore_ticket(self, ticket: Ticket) -> None:
        """Re-attach an open ticket when rebuilding from a snapshot image."""
        self._tickets[ticket.id] = ticket
        self._ticket_by_alert[ticket.alert_id] = ticket.id

    def task(self, alert_id: str, ticket_id: str, assignee: str, at: int) -> Alert:
        alert = self._live.get(alert_id)
        if alert is None:
            raise ValidationError(f"unknown alert '{alert_id}'")
        if alert.status is not AlertStatus.UNASSIGNED:
            raise TransitionError(f"alert '{alert_id}' is already {alert.status.value}")
        if ticket_id in self._tickets or ticket_id in self._closed_tickets:
            raise ValidationError(f"duplicate ticket id '{ticket_id}'")
        updated = replace(
            alert,
            status=AlertStatus.TASKED,
            ticket_id=ticket_id,
            # Event-source clocks can lag; never let the change precede the raise.
            status_changed_at=max(at, alert.raised_at),
        )
        ticket = Ticket(id=ticket_id, alert_id=alert_id, assignee=assignee)
        self._history[alert_id] = updated
        self._live[alert_id] = updated
        self._tickets[ticket_id] = ticket
        self._ticket_by_alert[alert_id] = ticket_id
        return updated

    def resolve(self, alert_id: str, at: int) -> Alert:
        alert = self._live.get(alert_id)
        if alert is None:
            if alert_id in self._history:
                raise TransitionError(f"alert '{alert_id}' is already resolved")
            raise ValidationError(f"unknown alert '{alert_id}'")
        updated = replace(
            alert,
            status=AlertStatus.RESOLVED,
            status_changed_at=max(at, alert.raised_at),
        )
        self._history[alert_id] = updated
        del self._live[alert_id]
        if alert.ticket_id is not None:
            ticket = self._tickets.pop(alert.ticket_id)
            self._closed_tickets[ticket.id] = replace(ticket, state=TicketState.CLOSED)
        return updated

    def note(self, alert_id: str, author: str, text: str, at: int) -> Ticket:
        alert = self._live.get(alert_id)
        if alert is None:
            raise ValidationError(f"unknown alert '{alert_id}'")
        if alert.ticket_id is None:
            raise ValidationError(f"no ticket bound to alert '{alert_id}'")
        ticket = self._tickets[alert.ticket_id]
        updated = replace(ticket, notes=ticket.notes + ({"at": at, "author": author, "text": text},))
        self._tickets[ticket.id] = updated
        return updated
