"""Deterministic exercise content: a realistic network and scripted traffic.

Everything in this module is reproducible by construction. The topology is
assembled with plain arithmetic (no RNG), the scripted walkthrough is a
fixed command list, and the load simulator draws every choice from a seeded
SplitMix64 stream, so the same config always yields the same bytes.

The simulator keeps a shadow BoardState and applies each command before
emitting it; that guarantees the emitted stream is valid against a fresh
server (pipe ids are engine-allocated, so predicting them requires replaying
the same allocation logic, which the shadow state does for free).
Deliberately invalid commands (when ``invalid_rate`` > 0) are the one
exception: they are emitted unapplied, to exercise rejection paths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .alerts import AlertStatus
from .rng import SplitMix64
from .state import BoardState, ClientIdentity, Command, CommandKind, Role
from .topology import Topology, load_topology

# 2013-01-01T00:00:00Z, the exercise epoch.
BASE_AT = 1356998400000

NETWORK_NAME = "bankworld-ops"

MANAGER = ClientIdentity(client_id="ops-manager", role=Role.MANAGER)
ANALYSTS = tuple(
    ClientIdentity(client_id=f"analyst-{i}", role=Role.MEMBER) for i in range(1, 5)
)


# ---------------------------------------------------------------------------
# Fixture topology


def _asset(aid: str, sub_zone: str, geo: list[str], func: list[str], addr: list[str]) -> dict:
    return {
        "id": aid,
        "hostname": aid,
        "sub_zone_id": sub_zone,
        "geo_tags": geo,
        "function_tags": func,
        "addresses": addr,
    }


def _office(sid: str, name: str, rank: int, prefix: str, octet: int, geo: list[str], counts: dict) -> dict:
    assets = []
    host = 10
    for i in range(1, counts.get("ws", 0) + 1):
        func = ["workstation"]
        # A couple of stragglers carry the known-bad runtime, so tag queries
        # have something to find.
        if i in (2, 5) and sid in ("boston", "london"):
            func.append("unpatched java")
        assets.append(_asset(f"{prefix}-ws-{i:02d}", sid, geo, func, [f"10.20.{octet}.{host}"]))
        host += 1
    for i in range(1, counts.get("srv", 0) + 1):
        assets.append(_asset(f"{prefix}-srv-{i:02d}", sid, geo, ["file server"], [f"10.20.{octet}.{host}"]))
        host += 1
    for i in range(1, counts.get("vc", 0) + 1):
        assets.append(_asset(f"{prefix}-vc-{i:02d}", sid, geo, ["video conferencing", "voip"], [f"10.20.{octet}.{host}"]))
        host += 1
    for i in range(1, counts.get("phone", 0) + 1):
        assets.append(_asset(f"{prefix}-phone-{i:02d}", sid, geo, ["voip", "phone"], [f"10.20.{octet}.{host}"]))
        host += 1
    return {
        "id": sid,
        "display_name": name,
        "kind": "geographic",
        "layout_rank": rank,
        "assets": assets,
    }


def generate_fixture() -> dict:
    """The standing exercise network: five zones, three mission areas."""
    vpn_assets = [
        _asset(f"vpn-gw-{i:02d}", "vpn_users", [], ["vpn", "gateway"], [f"10.10.0.{i}"])
        for i in (1, 2)
    ] + [
        _asset(f"vpn-user-{i:02d}", "vpn_users", [], ["vpn", "workstation"], [f"10.10.1.{i}"])
        for i in range(1, 5)
    ]

    offices = [
        _office("boston", "Boston", 1, "bos", 1, ["boston", "usa", "north america"],
                {"ws": 8, "srv": 2, "vc": 1, "phone": 1}),
        _office("sydney", "Sydney", 2, "syd", 2, ["sydney", "australia", "oceania"],
                {"ws": 5, "srv": 1, "vc": 1, "phone": 1}),
        _office("melbourne", "Melbourne", 3, "mel", 3, ["melbourne", "australia", "oceania"],
                {"ws": 3, "srv": 1, "vc": 1}),
        _office("london", "London", 4, "lon", 4, ["london", "uk", "europe"],
                {"ws": 5, "srv": 1, "vc": 1, "phone": 1}),
        _office("tokyo", "Tokyo", 5, "tok", 5, ["tokyo", "japan", "asia"],
                {"ws": 3, "srv": 1, "vc": 1, "phone": 1}),
    ]

    def core_sub(sid: str, name: str, rank: int, specs: list[tuple[str, list[str]]], octet: int) -> dict:
        return {
            "id": sid,
            "display_name": name,
            "kind": "functional",
            "layout_rank": rank,
            "assets": [
                _asset(aid, sid, [], func, [f"10.30.{octet}.{10 + i}"])
                for i, (aid, func) in enumerate(specs)
            ],
        }

    core = [
        core_sub("net_defense", "Network Defense", 1, [
            ("nd-fw-01", ["security", "firewall"]),
            ("nd-ips-01", ["security", "ips"]),
            ("nd-siem-01", ["security", "siem"]),
            ("nd-scan-01", ["security", "scanner"]),
        ], 1),
        core_sub("email", "Email", 2, [
            ("mail-mx-01", ["email", "mx"]),
            ("mail-mx-02", ["email", "mx"]),
            ("mail-store-01", ["email", "store"]),
            ("mail-av-01", ["email", "antivirus"]),
        ], 2),
        core_sub("dns", "DNS", 3, [
            ("dns-auth-01", ["dns", "authoritative"]),
            ("dns-cache-01", ["dns", "resolver"]),
            ("dns-cache-02", ["dns", "resolver"]),
        ], 3),
    ]

    datacenter = [
        {
            "id": "dc_compute",
            "display_name": "DC Compute",
            "kind": "functional",
            "layout_rank": 1,
            "assets": [
                _asset("dcc-esx-01", "dc_compute", [], ["compute", "hypervisor"], ["10.40.1.11"]),
                _asset("dcc-esx-02", "dc_compute", [], ["compute", "hypervisor"], ["10.40.1.12"]),
                _asset("dcc-esx-03", "dc_compute", [], ["compute", "hypervisor"], ["10.40.1.13"]),
                _asset("dcc-db-01", "dc_compute", [], ["database"], ["10.40.1.21"]),
                _asset("dcc-db-02", "dc_compute", [], ["database"], ["10.40.1.22"]),
                _asset("dcc-app-01", "dc_compute", [], ["application", "unpatched java"], ["10.40.1.31"]),
            ],
        },
        {
            "id": "dc_storage",
            "display_name": "DC Storage",
            "kind": "functional",
            "layout_rank": 2,
            "assets": [
                _asset("dcs-san-01", "dc_storage", [], ["storage", "san"], ["10.40.2.11"]),
                _asset("dcs-san-02", "dc_storage", [], ["storage", "san"], ["10.40.2.12"]),
                _asset("dcs-nas-01", "dc_storage", [], ["storage", "nas"], ["10.40.2.13"]),
                _asset("dcs-backup-01", "dc_storage", [], ["storage", "backup"], ["10.40.2.21"]),
                _asset("dcs-backup-02", "dc_storage", [], ["storage", "backup"], ["10.40.2.22"]),
            ],
        },
    ]

    extranet = [
        {
            "id": "extranet_partners",
            "display_name": "Partner Extranet",
            "kind": "functional",
            "layout_rank": 1,
            "assets": [
                _asset("ext-web-01", "extranet_partners", [], ["extranet", "web"], ["194.220.1.10"]),
                _asset("ext-web-02", "extranet_partners", [], ["extranet", "web"], ["194.220.1.11"]),
                _asset("ext-sftp-01", "extranet_partners", [], ["extranet", "sftp"], ["194.220.1.20"]),
                _asset("ext-b2b-01", "extranet_partners", [], ["extranet", "b2b"], ["194.220.1.30"]),
                _asset("ext-b2b-02", "extranet_partners", [], ["extranet", "b2b"], ["194.220.1.31"]),
                _asset("ext-dmz-proxy-01", "extranet_partners", [], ["extranet", "dmz", "proxy"], ["194.220.1.40"]),
            ],
        }
    ]

    vc_phone = []
    for office in offices:
        for asset in office["assets"]:
            if "-vc-" in asset["id"] or "-phone-" in asset["id"]:
                vc_phone.append(asset["id"])

    return {
        "network_name": NETWORK_NAME,
        "schema_version": 1,
        "zones": [
            {"id": "vpn", "display_name": "Remote Access", "layout_rank": 1,
             "sub_zones": [{"id": "vpn_users", "display_name": "VPN Users",
                            "kind": "functional", "layout_rank": 1, "assets": vpn_assets}]},
            {"id": "offices", "display_name": "Branch Offices", "layout_rank": 2,
             "sub_zones": offices},
            {"id": "core", "display_name": "Core Services", "layout_rank": 3,
             "sub_zones": core},
            {"id": "datacenter", "display_name": "Data Center", "layout_rank": 4,
             "sub_zones": datacenter},
            {"id": "extranet", "display_name": "Extranet", "layout_rank": 5,
             "sub_zones": extranet},
        ],
        "missions": [
            {"id": "vtc_voip", "display_name": "VTC / VOIP", "color": "#2a6fbb", "rank": 1,
             "dependency_asset_ids": sorted(vc_phone + ["vpn-gw-01", "vpn-gw-02"])},
            {"id": "b_docs", "display_name": "Business Documents", "color": "#2f9e44", "rank": 2,
             "dependency_asset_ids": ["mail-mx-01", "mail-mx-02", "mail-store-01", "mail-av-01",
                                      "dcs-nas-01", "dcs-backup-01", "dcs-backup-02",
                                      "bos-srv-01", "lon-srv-01", "dns-auth-01"]},
            {"id": "b_stream", "display_name": "Operations Streaming", "color": "#c0392b", "rank": 3,
             "dependency_asset_ids": ["dcc-esx-01", "dcc-esx-02", "dcc-esx-03",
                                      "dcc-db-01", "dcc-db-02", "dcc-app-01",
                                      "ext-web-01", "ext-web-02",
                                      "dns-cache-01", "dns-cache-02"]},
        ],
    }


def fixture_topology() -> Topology:
    return load_topology(generate_fixture())


# ---------------------------------------------------------------------------
# Scripted walkthrough


def make_boston_fixture() -> list[Command]:
    """The standing demo: a bad morning in Boston, plus a strained VPN link.

    Leaves the board with the VTC/VOIP mission active, ten live Boston
    alerts (one tasked, nine not), a vpn_users<->sydney flow pipe, and one
    health alert on the Sydney video conferencing bridge.
    """
    commands: list[Command] = []
    n = 0

    def emit(issuer: ClientIdentity, kind: CommandKind, payload: dict) -> None:
        nonlocal n
        commands.append(
            Command(
                command_id=f"boston-{n:03d}",
                issuer=issuer,
                kind=kind.value,
                payload=payload,
                at=BASE_AT + n * 1000,
            )
        )
        n += 1

    emit(MANAGER, CommandKind.ACTIVATE_MISSION, {"mission_id": "vtc_voip"})

    boston_subjects = [
        ("bos-ws-01", "security", "malware beacon observed"),
        ("bos-ws-02", "security", "malware beacon observed"),
        ("bos-ws-03", "health", "endpoint agent offline"),
        ("bos-ws-04", "security", "port scan from workstation"),
        ("bos-ws-05", "health", "disk failure predicted"),
        ("bos-ws-06", "security", "credential reuse detected"),
        ("bos-srv-01", "health", "file server unreachable"),
        ("bos-srv-02", "performance", "backup window overrun"),
        ("bos-vc-01", "health", "video bridge packet loss"),
        ("bos-phone-01", "health", "phone registration flapping"),
    ]
    for i, (asset_id, category, summary) in enumerate(boston_subjects):
        emit(
            ANALYSTS[i % len(ANALYSTS)],
            CommandKind.RAISE_ALERT,
            {
                "alert_id": f"bos-incident-{i:02d}",
                "category": category,
                "subject": {"kind": "asset", "ref": asset_id},
                "summary": summary,
            },
        )

    emit(
        ANALYSTS[0],
        CommandKind.TASK_ALERT,
        {"alert_id": "bos-incident-00", "ticket_id": "tkt-boston-1", "assignee": "analyst-1"},
    )

    emit(
        ANALYSTS[1],
        CommandKind.REPORT_FLOW,
        {
            "endpoint_a": "vpn_users",
            "endpoint_b": "sydney",
            "available_fraction": 0.55,
            "current_fraction": 0.3,
        },
    )

    emit(
        ANALYSTS[2],
        CommandKind.RAISE_ALERT,
        {
            "alert_id": "syd-vc-outage",
            "category": "health",
            "subject": {"kind": "asset", "ref": "syd-vc-01"},
            "summary": "video conferencing bridge down in Sydney",
        },
    )
    return commands


# ---------------------------------------------------------------------------
# Seeded load simulator


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 42
    ticks: int = 600
    start_at: int = BASE_AT
    # Per-tick operation count is 1 + randrange(max_ops_per_tick).
    max_ops_per_tick: int = 3
    invalid_rate: float = 0.05


_QUERY_BANK = [
    ("q-java", "Unpatched Java", 'tag:"unpatched java"', "#8e44ad"),
    ("q-aus", "Australia", 'geo:"australia"', "#d4882a"),
    ("q-ext", "Partner range", "ip:194.220.1.0/24", "#1abc9c"),
    ("q-vc", "Conf bridges", 'host:"*-vc-*" AND NOT geo:"boston"', "#5d6d7e"),
]


class ScenarioSimulator:
    """Emits a deterministic command stream against the fixture network."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.rng = SplitMix64(config.seed)
        self.topology = fixture_topology()
        self.shadow = BoardState(self.topology)
        self.asset_ids = sorted(self.topology.assets_by_id)
        self.sub_zone_ids = sorted(self.topology.sub_zones_by_id)
        self.mission_ids = sorted(self.topology.missions_by_id)
        self.n = 0
        self.saved_queries: list[str] = []

    # -- helpers ----------------------------------------------------------

    def _command(self, issuer: ClientIdentity, kind: CommandKind, payload: dict, at: int) -> Command:
        command = Command(
            command_id=f"sim-{self.config.seed}-{self.n:06d}",
            issuer=issuer,
            kind=kind.value,
            payload=payload,
            at=at,
        )
        self.n += 1
        return command

    def _analyst(self) -> ClientIdentity:
        return ANALYSTS[self.rng.randrange(len(ANALYSTS))]

    def _live(self, status: AlertStatus | None = None):
        alerts = self.shadow.alerts.live_alerts()
        if status is None:
            return alerts
        return [a for a in alerts if a.status is status]

    # -- operations ---------------------------------------------------------

    def _op_raise(self, at: int) -> Command:
        roll = self.rng.random()
        if roll < 0.85:
            subject = {"kind": "asset", "ref": self.rng.choice(self.asset_ids)}
        else:
            subject = {"kind": "subzone", "ref": self.rng.choice(self.sub_zone_ids)}
        category = self.rng.choice(["health", "security", "performance"])
        payload = {
            "alert_id": f"sim-{self.config.seed}-alert-{self.n:06d}",
            "category": category,
            "subject": subject,
            "summary": f"synthetic {category} event {self.n}",
        }
        return self._command(self._analyst(), CommandKind.RAISE_ALERT, payload, at)

    def _op_task(self, at: int) -> Command | None:
        candidates = self._live(AlertStatus.UNASSIGNED)
        if not candidates:
            return None
        alert = self.rng.choice(candidates)
        issuer = self._analyst()
        payload = {
            "alert_id": alert.id,
            "ticket_id": f"tkt-{self.config.seed}-{self.n:06d}",
            "assignee": issuer.client_id,
        }
        return self._command(issuer, CommandKind.TASK_ALERT, payload, at)

    def _op_resolve(self, at: int) -> Command | None:
        candidates = self._live()
        if not candidates:
            return None
        alert = self.rng.choice(candidates)
        return self._command(
            self._analyst(), CommandKind.RESOLVE_ALERT, {"alert_id": alert.id}, at
        )

    def _op_flow(self, at: int) -> Command:
        a = self.rng.choice(self.sub_zone_ids)
        b = self.rng.choice([s for s in self.sub_zone_ids if s != a])
        available = (3000 + self.rng.randrange(7001)) / 10000
        current = self.rng.randrange(int(available * 10000) + 1) / 10000
        payload = {
            "endpoint_a": a,
            "endpoint_b": b,
            "available_fraction": available,
            "current_fraction": current,
        }
        return self._command(self._analyst(), CommandKind.REPORT_FLOW, payload, at)

    def _op_note(self, at: int) -> Command | None:
        candidates = self._live(AlertStatus.TASKED)
        if not candidates:
            return None
        alert = self.rng.choice(candidates)
        issuer = self._analyst()
        payload = {
            "alert_id": alert.id,
            "note": f"progress note {self.n}",
            "author": issuer.client_id,
        }
        return self._command(issuer, CommandKind.ADD_TICKET_NOTE, payload, at)

    def _op_mission(self, at: int) -> Command:
        mission_id = self.rng.choice(self.mission_ids)
        active = mission_id in self.shadow.view.active_missions
        kind = CommandKind.DEACTIVATE_MISSION if active else CommandKind.ACTIVATE_MISSION
        return self._command(MANAGER, kind, {"mission_id": mission_id}, at)

    def _op_query(self, at: int) -> Command:
        if len(self.saved_queries) < len(_QUERY_BANK):
            qid, label, expr, color = _QUERY_BANK[len(self.saved_queries)]
            self.saved_queries.append(qid)
            payload = {"query_id": qid, "label": label, "expression": expr, "color": color}
            return self._command(MANAGER, CommandKind.SAVE_QUERY, payload, at)
        qid = self.rng.choice(self.saved_queries)
        active = qid in self.shadow.view.active_queries
        kind = CommandKind.DEACTIVATE_QUERY if active else CommandKind.ACTIVATE_QUERY
        return self._command(MANAGER, kind, {"query_id": qid}, at)

    def _op_invalid(self, at: int) -> Command:
        return self._command(
            self._analyst(),
            CommandKind.RESOLVE_ALERT,
            {"alert_id": f"missing-{self.n:06d}"},
            at,
        )

    # -- the stream -----------------------------------------------------------

    def run(self) -> list[Command]:
        out: list[Command] = []
        for tick in range(self.config.ticks):
            at = self.config.start_at + tick * 1000
            for _ in range(1 + self.rng.randrange(self.config.max_ops_per_tick)):
                command = self._pick(at)
                if command is None:
                    continue
                out.append(command)
                if command.payload.get("alert_id", "").startswith("missing-"):
                    continue  # deliberately invalid; shadow must not apply it
                self.shadow.apply(command)
        return out

    def _pick(self, at: int) -> Command | None:
        roll = self.rng.random()
        if roll < self.config.invalid_rate:
            return self._op_invalid(at)
        roll = self.rng.random()
        # Deterministic backpressure: once the live set is crowded, lean on
        # resolves so arbitrarily long runs keep a bounded board.
        if len(self.shadow.alerts.live_alerts()) > 60:
            if roll < 0.10:
                return self._op_raise(at)
            if roll < 0.25:
                return self._op_task(at)
            if roll < 0.80:
                return self._op_resolve(at)
            if roll < 0.88:
                return self._op_flow(at)
            if roll < 0.96:
                return self._op_note(at)
            return self._op_mission(at)
        if roll < 0.34:
            return self._op_raise(at)
        if roll < 0.52:
            return self._op_task(at)
        if roll < 0.72:
            return self._op_resolve(at)
        if roll < 0.84:
            return self._op_flow(at)
        if roll < 0.92:
            return self._op_note(at)
        if roll < 0.96:
            return self._op_mission(at)
        return self._op_query(at)


def run_scenario(config: ScenarioConfig | None = None) -> list[Command]:
    return ScenarioSimulator(config or ScenarioConfig()).run()


def stream_bytes(commands: list[Command]) -> bytes:
    """Canonical NDJSON encoding of a command stream (for byte comparison)."""
    return b"".join(
        json.dumps(c.to_record(), sort_keys=True, separators=(",", ":")).encode("utf-8") + b"\n"
        for c in commands
    )
