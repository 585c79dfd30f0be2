"""Everything the board draws beyond raw state.

Raw state is alerts, pipes, and saved queries; the operator-visible board
adds derived layers: mission highlight regions, the red strip connecting
unresolved mission-relevant problems, individually drawn alert badges,
query highlight overlays, the warning menu with its capsule colors and
mission-aware ordering, the deterministic menu scroll window, and the
mission-filtered pipe list.

Every layer here is a pure function of (topology, live alerts, live pipes,
saved queries, view controls). Toggling a mission or query on and off
restores the derived picture exactly; nothing in this module holds state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from .alerts import Alert, AlertCategory, AlertStatus, affected_assets
from .errors import ValidationError
from .pipes import Pipe, visible_pipes
from .query import FunctionalQuery, evaluate_query
from .topology import Topology, subzones_touching

MAX_ACTIVE_QUERIES = 8

NEUTRAL_CAPSULE = "neutral"

_CATEGORY_ORDER = (AlertCategory.HEALTH, AlertCategory.SECURITY, AlertCategory.PERFORMANCE)


@dataclass(frozen=True)
class BoardView:
    """Operator-controlled view state: which overlays are switched on."""

    active_missions: tuple[str, ...] = ()
    active_queries: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "active_missions": list(self.active_missions),
            "active_queries": list(self.active_queries),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoardView":
        return cls(
            active_missions=tuple(data.get("active_missions", [])),
            active_queries=tuple(data.get("active_queries", [])),
        )


@dataclass(frozen=True)
class MenuEntry:
    alert_id: str
    category: AlertCategory
    text: str
    capsule_right: str  # "red" | "yellow", tracks alert status
    capsule_left: str  # primary mission's color, or the neutral token


@dataclass(frozen=True)
class QueryHighlight:
    asset_ids: frozenset[str]
    sub_zone_ids: frozenset[str]


@dataclass(frozen=True)
class BoardLayers:
    """All derived layers for one view over one state snapshot."""

    mission_highlights: dict[str, frozenset[str]]
    query_highlights: dict[str, QueryHighlight]
    strip: dict[str, tuple[str, ...]]
    individual_badges: frozenset[str]
    menu: tuple[MenuEntry, ...]
    visible_pipes: tuple[str, ...]


# ---------------------------------------------------------------------------
# View-control operations


def activate_mission(view: BoardView, mission_id: str, topology: Topology) -> BoardView:
    if mission_id not in topology.missions_by_id:
        raise ValidationError(f"unknown mission '{mission_id}'")
    if mission_id in view.active_missions:
        raise ValidationError(f"mission '{mission_id}' already active")
    return replace(view, active_missions=view.active_missions + (mission_id,))


def deactivate_mission(view: BoardView, mission_id: str, topology: Topology) -> BoardView:
    if mission_id not in topology.missions_by_id:
        raise ValidationError(f"unknown mission '{mission_id}'")
    if mission_id not in view.active_missions:
        raise ValidationError(f"mission '{mission_id}' not active")
    return replace(view, active_missions=tuple(m for m in view.active_missions if m != mission_id))


def activate_query(view: BoardView, queries: Mapping[str, FunctionalQuery], query_id: str) -> BoardView:
    if query_id not in queries:
        raise ValidationError(f"unknown query '{query_id}'")
    if query_id in view.active_queries:
        raise ValidationError(f"query '{query_id}' already active")
    if len(view.active_queries) >= MAX_ACTIVE_QUERIES:
        raise ValidationError(f"query cap reached: at most {MAX_ACTIVE_QUERIES} queries may be active")
    return replace(view, active_queries=view.active_queries + (query_id,))


def deactivate_query(view: BoardView, queries: Mapping[str, FunctionalQuery], query_id: str) -> BoardView:
    if query_id not in queries:
        raise ValidationError(f"unknown query '{query_id}'")
    if query_id not in view.active_queries:
        raise ValidationError(f"query '{query_id}' not active")
    return replace(view, active_queries=tuple(q for q in view.active_queries if q != query_id))


# ---------------------------------------------------------------------------
# Derived layers


def _strip_position(alert: Alert, topology: Topology, pipe_endpoints: Mapping[str, tuple[str, str]]) -> tuple[int, int]:
    """Panel position used to order the strip; pipes use their leftmost end."""
    subject = alert.subject
    if subject.kind.value == "asset":
        return topology.layout_key(topology.assets_by_id[subject.ref].sub_zone_id)
    if subject.kind.value == "subzone":
        return topology.layout_key(subject.ref)
    a, b = pipe_endpoints[subject.ref]
    return min(topology.layout_key(a), topology.layout_key(b))


def compute_strip(
    topology: Topology,
    live_alerts: list[Alert],
    pipe_endpoints: Mapping[str, tuple[str, str]],
    mission_id: str,
) -> list[str]:
    """Unassigned alerts impacting the mission, swept left to right.

    Only red (unassigned) problems are connected by the strip; tasked ones
    already have an owner. Ordering is panel layout order (zone rank, then
    sub-zone rank) with raise time and id as tie-breaks, so the strip
    traces a stable path across the board.
    """
    deps = _mission_deps(topology, mission_id)
    hits = [
        a
        for a in live_alerts
        if a.status is AlertStatus.UNASSIGNED
        and affected_assets(a.subject, topology, pipe_endpoints) & deps
    ]
    hits.sort(key=lambda a: (*_strip_position(a, topology, pipe_endpoints), a.raised_at, a.id))
    return [a.id for a in hits]


def _mission_deps(topology: Topology, mission_id: str) -> frozenset[str]:
    mission = topology.missions_by_id.get(mission_id)
    if mission is None:
        raise ValidationError(f"unknown mission '{mission_id}'")
    return mission.dependency_asset_ids


def individual_badges(
    live_alerts: list[Alert],
    active_missions: tuple[str, ...],
    topology: Topology,
    pipe_endpoints: Mapping[str, tuple[str, str]],
) -> frozenset[str]:
    """Alerts drawn as their own badge instead of an aggregate count.

    A problem earns an individual heart/shield/speedometer badge exactly
    when it touches an active mission's dependency set; everything else
    stays rolled up so healthy-scale aggregation is preserved.
    """
    if not active_missions:
        return frozenset()
    deps: set[str] = set()
    for mid in active_missions:
        deps |= _mission_deps(topology, mid)
    return frozenset(
        a.id for a in live_alerts if affected_assets(a.subject, topology, pipe_endpoints) & deps
    )


def build_menu(
    live_alerts: list[Alert],
    active_missions: tuple[str, ...],
    topology: Topology,
) -> list[MenuEntry]:
    """Warning menu entries for every live alert, pipe alerts included.

    Categories keep a fixed health / security / performance order. Within
    a category, alerts whose primary mission is currently active float to
    the top, then unassigned before tasked, then newest first.
    """
    active = set(active_missions)
    mission_colors = {m.id: m.color for m in topology.missions}

    def sort_key(alert: Alert):
        return (
            _CATEGORY_ORDER.index(alert.category),
            0 if alert.primary_mission in active else 1,
            0 if alert.status is AlertStatus.UNASSIGNED else 1,
            -alert.raised_at,
            alert.id,
        )

    entries = []
    for alert in sorted(live_alerts, key=sort_key):
        entries.append(
            MenuEntry(
                alert_id=alert.id,
                category=alert.category,
                text=alert.summary,
                capsule_right=alert.status.flag_color or "red",
                capsule_left=mission_colors.get(alert.primary_mission, NEUTRAL_CAPSULE),
            )
        )
    return entries


def menu_window(menu: list[MenuEntry], window_size: int, tick: int) -> list[MenuEntry]:
    """Deterministic scroll window over the menu.

    ``window_size`` is the per-category share of visible rows. A group
    that fits is shown whole; a larger group rotates one entry per tick,
    wrapping cyclically, so a full cycle of ticks shows every entry.
    """
    if window_size < 1:
        raise ValidationError("window_size must be >= 1")
    out: list[MenuEntry] = []
    for category in _CATEGORY_ORDER:
        group = [e for e in menu if e.category is category]
        n = len(group)
        if n <= window_size:
            out.extend(group)
        else:
            start = tick % n
            out.extend(group[(start + i) % n] for i in range(window_size))
    return out


def derive_layers(
    topology: Topology,
    live_alerts: list[Alert],
    live_pipes: list[Pipe],
    queries: Mapping[str, FunctionalQuery],
    pipe_endpoints: Mapping[str, tuple[str, str]],
    view: BoardView,
) -> BoardLayers:
    """Compute every derived layer for the current view. Pure."""
    alerts_by_id = {a.id: a for a in live_alerts}
    mission_highlights = {}
    strip = {}
    for mid in view.active_missions:
        deps = _mission_deps(topology, mid)
        mission_highlights[mid] = subzones_touching(topology, deps)
        strip[mid] = tuple(compute_strip(topology, live_alerts, pipe_endpoints, mid))
    query_highlights = {}
    for qid in view.active_queries:
        matched = evaluate_query(queries[qid].expression, topology)
        query_highlights[qid] = QueryHighlight(
            asset_ids=matched,
            sub_zone_ids=subzones_touching(topology, matched),
        )
    return BoardLayers(
        mission_highlights=mission_highlights,
        query_highlights=query_highlights,
        strip=strip,
        individual_badges=individual_badges(live_alerts, view.active_missions, topology, pipe_endpoints),
        menu=tuple(build_menu(live_alerts, view.active_missions, topology)),
        visible_pipes=tuple(
            p.id for p in visible_pipes(live_pipes, alerts_by_id, view.active_missions, topology)
        ),
    )
