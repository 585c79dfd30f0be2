"""Inter-sub-zone connectivity problems drawn as pipes along the board bottom.

A pipe appears when telemetry reports degraded bandwidth between two
sub-zones and lives exactly as long as its performance alert: red while
unassigned, yellow once ticketed, gone when resolved. The outer band shows
the qualitative capacity still available, the inner band the live
utilization of that degraded link; both arrive as fractions of nominal
capacity and are refreshed in place by subsequent reports.

Fractions are quantized to basis points (1/10000) on ingestion so the
canonical state encoding is pure integers and digests stay stable across
client implementations with different float formatting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Mapping

from .alerts import Alert, AlertStatus
from .errors import ValidationError
from .topology import Topology


class PipeColor(str, Enum):
    RED = "red"
    YELLOW = "yellow"


def quantize_fraction(value: float, name: str) -> int:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValidationError(f"{name} must be a number in [0, 1]")
    if not 0.0 <= float(value) <= 1.0:
        raise ValidationError(f"{name} {value!r} out of range [0, 1]")
    return round(float(value) * 10000)


@dataclass(frozen=True)
class Pipe:
    id: str
    endpoint_a: str
    endpoint_b: str
    available_bp: int  # outer band, basis points of nominal capacity
    current_bp: int  # inner band
    alert_id: str

    @property
    def available_fraction(self) -> float:
        return self.available_bp / 10000.0

    @property
    def current_fraction(self) -> float:
        return self.current_bp / 10000.0

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.endpoint_a, self.endpoint_b))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "endpoint_a": self.endpoint_a,
            "endpoint_b": self.endpoint_b,
            "available_bp": self.available_bp,
            "current_bp": self.current_bp,
            "alert_id": self.alert_id,
        }

    @cached_property
    def canonical(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def pipe_color(pipe: Pipe, alerts: Mapping[str, Alert]) -> PipeColor:
    """Red while the pipe's alert is unassigned, yellow once tasked."""
    alert = alerts[pipe.alert_id]
    if alert.status is AlertStatus.UNASSIGNED:
        return PipeColor.RED
    return PipeColor.YELLOW


class PipeStore:
    """Live pipes, unique per unordered endpoint pair."""

    def __init__(self):
        self._live: dict[str, Pipe] = {}
        self._by_pair: dict[frozenset[str], str] = {}
        # Endpoints of every pipe ever created; ids are never reused, so
        # mission-impact classification stays a pure function of pipe id.
        self._endpoints: dict[str, tuple[str, str]] = {}

    def live_pipes(self) -> list[Pipe]:
        return list(self._live.values())

    def get(self, pipe_id: str) -> Pipe | None:
        return self._live.get(pipe_id)

    def find_by_pair(self, a: str, b: str) -> Pipe | None:
        pid = self._by_pair.get(frozenset((a, b)))
        return self._live.get(pid) if pid is not None else None

    @property
    def endpoint_map(self) -> Mapping[str, tuple[str, str]]:
        return self._endpoints

    def add(self, pipe: Pipe) -> Pipe:
        if pipe.pair in self._by_pair:
            raise ValidationError(f"live pipe already exists for {sorted(pipe.pair)}")
        if pipe.id in self._endpoints:
            raise ValidationError(f"duplicate pipe id '{pipe.id}'")
        self._live[pipe.id] = pipe
        self._by_pair[pipe.pair] = pipe.id
        self._endpoints[pipe.id] = (pipe.endpoint_a, pipe.endpoint_b)
        return pipe

    def update_bands(self, pipe_id: str, available_bp: int, current_bp: int) -> Pipe:
        pipe = self._live[pipe_id]
        updated = replace(pipe, available_bp=available_bp, current_bp=current_bp)
        self._live[pipe_id] = updated
        return updated

    def remove(self, pipe_id: str) -> Pipe:
        pipe = self._live.pop(pipe_id)
        del self._by_pair[pipe.pair]
        return pipe

    def pipe_for_alert(self, alert_id: str) -> Pipe | None:
        for pipe in self._live.values():
            if pipe.alert_id == alert_id:
                return pipe
        return None

    def register_endpoints(self, pipe_id: str, a: str, b: str) -> None:
        """Record endpoints of a pipe that is already gone (snapshot restore)."""
        self._endpoints[pipe_id] = (a, b)


def visible_pipes(
    pipes: list[Pipe],
    alerts: Mapping[str, Alert],
    active_missions: tuple[str, ...],
    topology: Topology,
) -> list[Pipe]:
    """Pipes shown on the board, oldest problem first.

    With no mission tab active every live pipe is visible. Once missions
    are active, only pipes with at least one endpoint sub-zone containing
    at least one dependency asset of an active mission remain; the rest
    temporarily disappear to reduce clutter.
    """
    ordered = sorted(pipes, key=lambda p: (alerts[p.alert_id].raised_at, p.id))
    if not active_missions:
        return ordered
    relevant_sub_zones: set[str] = set()
    for mid in active_missions:
        mission = topology.missions_by_id[mid]
        for aid in mission.dependency_asset_ids:
            relevant_sub_zones.add(topology.assets_by_id[aid].sub_zone_id)
    return [p for p in ordered if p.endpoint_a in relevant_sub_zones or p.endpoint_b in relevant_sub_zones]
