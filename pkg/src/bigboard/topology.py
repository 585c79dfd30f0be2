"""Enterprise network model shown on the board's central panel.

A topology is a fixed two-level hierarchy: zones ordered left to right
across the panel, each subdivided into geographic or functional sub-zones
holding the individual monitored assets. Mission areas sit alongside with
a dependency set of asset ids. Topologies are immutable once loaded;
changing the network means loading a new document.

The document format is JSON with top-level keys ``network_name``,
``schema_version``, ``zones[]``, ``missions[]``; each zone nests
``sub_zones[]`` and each sub-zone nests ``assets[]``. Set-valued fields
(tags, addresses, dependency ids) serialize as sorted lists so documents
round-trip to stable bytes.
"""

from __future__ import annotations

import hashlib
import ipaddress
import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable

from .errors import TopologyError, ValidationError

SCHEMA_VERSION = 1


class SubZoneKind(str, Enum):
    GEOGRAPHIC = "geographic"
    FUNCTIONAL = "functional"


@dataclass(frozen=True)
class Asset:
    """A single monitored host with its routing and classification tags."""

    id: str
    hostname: str
    sub_zone_id: str
    geo_tags: frozenset[str]
    function_tags: frozenset[str]
    addresses: frozenset[str]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "hostname": self.hostname,
            "sub_zone_id": self.sub_zone_id,
            "geo_tags": sorted(self.geo_tags),
            "function_tags": sorted(self.function_tags),
            "addresses": sorted(self.addresses),
        }


@dataclass(frozen=True)
class SubZone:
    """A panel box inside a zone: a city office, "E-mail", "DNS", ..."""

    id: str
    display_name: str
    kind: SubZoneKind
    layout_rank: int
    assets: tuple[Asset, ...]

    @cached_property
    def asset_ids(self) -> frozenset[str]:
        return frozenset(a.id for a in self.assets)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "display_name": self.display_name,
            "kind": self.kind.value,
            "layout_rank": self.layout_rank,
            "asset_ids": sorted(self.asset_ids),
            "assets": [a.to_dict() for a in self.assets],
        }


@dataclass(frozen=True)
class Zone:
    id: str
    display_name: str
    layout_rank: int
    sub_zones: tuple[SubZone, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "display_name": self.display_name,
            "layout_rank": self.layout_rank,
            "sub_zones": [s.to_dict() for s in self.sub_zones],
        }


@dataclass(frozen=True)
class MissionArea:
    """A key business objective with the assets it depends on.

    ``rank`` breaks ties when an alert touches several missions equally;
    lower rank wins. Colors must be unique so overlay layers stay
    distinguishable.
    """

    id: str
    display_name: str
    color: str
    rank: int
    dependency_asset_ids: frozenset[str]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "display_name": self.display_name,
            "color": self.color,
            "rank": self.rank,
            "dependency_asset_ids": sorted(self.dependency_asset_ids),
        }


@dataclass(frozen=True)
class Topology:
    network_name: str
    schema_version: int
    zones: tuple[Zone, ...]
    missions: tuple[MissionArea, ...]

    @cached_property
    def assets_by_id(self) -> dict[str, Asset]:
        return {a.id: a for z in self.zones for s in z.sub_zones for a in s.assets}

    @cached_property
    def sub_zones_by_id(self) -> dict[str, SubZone]:
        return {s.id: s for z in self.zones for s in z.sub_zones}

    @cached_property
    def zone_of_sub_zone(self) -> dict[str, Zone]:
        return {s.id: z for z in self.zones for s in z.sub_zones}

    @cached_property
    def missions_by_id(self) -> dict[str, MissionArea]:
        return {m.id: m for m in self.missions}

    @cached_property
    def all_asset_ids(self) -> frozenset[str]:
        return frozenset(self.assets_by_id)

    # Pre-lowered tag sets and integer addresses keep query evaluation cheap
    # on large inventories; the raw fields stay authoritative.

    @cached_property
    def geo_tags_lower(self) -> dict[str, frozenset[str]]:
        return {a.id: frozenset(t.lower() for t in a.geo_tags) for a in self.assets_by_id.values()}

    @cached_property
    def function_tags_lower(self) -> dict[str, frozenset[str]]:
        return {a.id: frozenset(t.lower() for t in a.function_tags) for a in self.assets_by_id.values()}

    @cached_property
    def address_ints(self) -> dict[str, tuple[int, ...]]:
        return {
            a.id: tuple(int(ipaddress.IPv4Address(addr)) for addr in sorted(a.addresses))
            for a in self.assets_by_id.values()
        }

    @cached_property
    def atom_cache(self) -> dict:
        """Per-topology memo for query atom evaluation; keyed by atom node."""
        return {}

    def sub_zone_of_asset(self, asset_id: str) -> SubZone:
        return self.sub_zones_by_id[self.assets_by_id[asset_id].sub_zone_id]

    def layout_key(self, sub_zone_id: str) -> tuple[int, int]:
        """(zone rank, sub-zone rank): the left-to-right panel position."""
        sz = self.sub_zones_by_id[sub_zone_id]
        return (self.zone_of_sub_zone[sz.id].layout_rank, sz.layout_rank)

    @cached_property
    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "network_name": self.network_name,
            "schema_version": self.schema_version,
            "zones": [z.to_dict() for z in self.zones],
            "missions": [m.to_dict() for m in self.missions],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def mission_dependency_set(topology: Topology, mission_id: str) -> frozenset[str]:
    """Asset ids whose failure directly degrades the given mission."""
    mission = topology.missions_by_id.get(mission_id)
    if mission is None:
        raise ValidationError(f"unknown mission '{mission_id}'")
    return mission.dependency_asset_ids


def subzones_touching(topology: Topology, asset_ids: Iterable[str]) -> frozenset[str]:
    """Sub-zones containing at least one of the given assets."""
    out = set()
    for aid in asset_ids:
        asset = topology.assets_by_id.get(aid)
        if asset is None:
            raise ValidationError(f"unknown asset '{aid}'")
        out.add(asset.sub_zone_id)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Document loading


def load_topology(source: str | Path | dict) -> Topology:
    """Parse and validate a topology document.

    ``source`` may be a path to a JSON file, a JSON string, or an already
    decoded dict. Raises TopologyError naming the first violated invariant.
    """
    if isinstance(source, dict):
        doc = source
    else:
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith((".json", ".topo"))):
            try:
                text = Path(source).read_text(encoding="utf-8")
            except OSError as exc:
                raise TopologyError(f"cannot read topology file: {exc}") from exc
        else:
            text = source
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"malformed topology document: {exc}") from exc
    if not isinstance(doc, dict):
        raise TopologyError("malformed topology document: top level must be an object")
    return _build(doc)


def _req(obj: dict, key: str, kind: type, where: str):
    if key not in obj:
        raise TopologyError(f"missing field '{key}' in {where}")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise TopologyError(f"field '{key}' in {where} must be {kind.__name__}")
    if not isinstance(value, kind):
        raise TopologyError(f"field '{key}' in {where} must be {kind.__name__}")
    return value


def _build(doc: dict) -> Topology:
    name = _req(doc, "network_name", str, "document")
    version = _req(doc, "schema_version", int, "document")
    zones_raw = _req(doc, "zones", list, "document")
    missions_raw = _req(doc, "missions", list, "document")

    zone_ids: set[str] = set()
    zone_ranks: set[int] = set()
    sub_zone_ids: set[str] = set()
    asset_ids: set[str] = set()
    zones: list[Zone] = []
    for z in zones_raw:
        zid = _req(z, "id", str, "zone")
        if zid in zone_ids:
            raise TopologyError(f"duplicate zone id '{zid}'")
        zone_ids.add(zid)
        zrank = _req(z, "layout_rank", int, f"zone '{zid}'")
        if zrank in zone_ranks:
            raise TopologyError(f"duplicate zone layout_rank {zrank} ('{zid}')")
        zone_ranks.add(zrank)
        sub_ranks: set[int] = set()
        sub_zones: list[SubZone] = []
        for s in z.get("sub_zones", []):
            sid = _req(s, "id", str, f"sub-zone of '{zid}'")
            if sid in sub_zone_ids:
                raise TopologyError(f"duplicate sub-zone id '{sid}'")
            sub_zone_ids.add(sid)
            sname = _req(s, "display_name", str, f"sub-zone '{sid}'")
            if not sname:
                raise TopologyError(f"empty display_name in sub-zone '{sid}'")
            srank = _req(s, "layout_rank", int, f"sub-zone '{sid}'")
            if srank in sub_ranks:
                raise TopologyError(f"duplicate sub-zone layout_rank {srank} in zone '{zid}'")
            sub_ranks.add(srank)
            kind_raw = _req(s, "kind", str, f"sub-zone '{sid}'")
            try:
                kind = SubZoneKind(kind_raw)
            except ValueError:
                raise TopologyError(f"unknown sub-zone kind '{kind_raw}' in '{sid}'") from None
            assets: list[Asset] = []
            for a in s.get("assets", []):
                aid = _req(a, "id", str, f"asset of '{sid}'")
                if aid in asset_ids:
                    raise TopologyError(f"duplicate asset id '{aid}'")
                asset_ids.add(aid)
                owner = a.get("sub_zone_id", sid)
                if owner != sid:
                    raise TopologyError(f"asset '{aid}' claims sub-zone '{owner}' but is nested in '{sid}'")
                addresses = []
                for addr in a.get("addresses", []):
                    try:
                        ipaddress.IPv4Address(addr)
                    except (ipaddress.AddressValueError, ValueError):
                        raise TopologyError(f"bad IPv4 address '{addr}' on asset '{aid}'") from None
                    addresses.append(addr)
                assets.append(
                    Asset(
                        id=aid,
                        hostname=_req(a, "hostname", str, f"asset '{aid}'"),
                        sub_zone_id=sid,
                        geo_tags=frozenset(a.get("geo_tags", [])),
                        function_tags=frozenset(a.get("function_tags", [])),
                        addresses=frozenset(addresses),
                    )
                )
            declared = s.get("asset_ids")
            if declared is not None and set(declared) != {a.id for a in assets}:
                raise TopologyError(f"asset_ids of sub-zone '{sid}' disagree with its nested assets")
            sub_zones.append(SubZone(id=sid, display_name=sname, kind=kind, layout_rank=srank, assets=tuple(assets)))
        zones.append(
            Zone(
                id=zid,
                display_name=_req(z, "display_name", str, f"zone '{zid}'"),
                layout_rank=zrank,
                sub_zones=tuple(sub_zones),
            )
        )

    mission_ids: set[str] = set()
    colors: set[str] = set()
    ranks: set[int] = set()
    missions: list[MissionArea] = []
    for m in missions_raw:
        mid = _req(m, "id", str, "mission")
        if mid in mission_ids:
            raise TopologyError(f"duplicate mission id '{mid}'")
        mission_ids.add(mid)
        color = _req(m, "color", str, f"mission '{mid}'")
        if color in colors:
            raise TopologyError(f"duplicate mission color '{color}' ('{mid}')")
        colors.add(color)
        rank = _req(m, "rank", int, f"mission '{mid}'")
        if rank in ranks:
            raise TopologyError(f"duplicate mission rank {rank} ('{mid}')")
        ranks.add(rank)
        deps = set(m.get("dependency_asset_ids", []))
        for aid in sorted(deps):
            if aid not in asset_ids:
                raise TopologyError(f"dangling asset reference '{aid}' in mission '{mid}'")
        missions.append(
            MissionArea(
                id=mid,
                display_name=_req(m, "display_name", str, f"mission '{mid}'"),
                color=color,
                rank=rank,
                dependency_asset_ids=frozenset(deps),
            )
        )

    return Topology(
        network_name=name,
        schema_version=version,
        zones=tuple(zones),
        missions=tuple(missions),
    )
