from __future__ import annotations

import json

import pytest

from bigboard.alerts import AlertStatus
from bigboard.errors import AuthorizationError, CommandRejected, TransitionError, ValidationError
from bigboard.scenario import ANALYSTS, MANAGER, ScenarioConfig, run_scenario
from bigboard.state import (
    RESERVED_ID_PREFIX,
    BoardState,
    ClientIdentity,
    Command,
    CommandKind,
    Role,
)

ANALYST = ANALYSTS[0]


def _reference_canonical(state: BoardState) -> str:
    return json.dumps(state.state_dict(), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Command records


def test_command_record_round_trip(mk):
    command = mk("RaiseAlert", {"alert_id": "a-1"}, MANAGER)
    record = command.to_record()
    assert record["issuer"] == {"client_id": "ops-manager", "role": "manager"}
    assert Command.from_record(record) == command


@pytest.mark.parametrize(
    "mutate",
    [
        lambda r: r.pop("command_id"),
        lambda r: r.update(command_id=""),
        lambda r: r.update(at="noon"),
        lambda r: r.update(payload=[1, 2]),
        lambda r: r.update(kind=7),
        lambda r: r.update(issuer="me"),
        lambda r: r.update(issuer={"client_id": "", "role": "member"}),
        lambda r: r.update(issuer={"client_id": "x", "role": "root"}),
    ],
)
def test_command_record_validation(mk, mutate):
    record = mk("RaiseAlert", {"alert_id": "a-1"}).to_record()
    mutate(record)
    with pytest.raises(ValidationError):
        Command.from_record(record)


def test_unknown_kind_rejected(fresh_state, mk):
    with pytest.raises(ValidationError) as err:
        fresh_state.apply(mk("ExplodeBoard", {}))
    assert "unknown command kind" in str(err.value)


# ---------------------------------------------------------------------------
# Canonical encoding: fast path versus json.dumps reference


def test_canonical_equals_reference_through_a_run(topo, boston_commands):
    state = BoardState(topo)
    assert state.canonical_state_json() == _reference_canonical(state)
    for command in boston_commands:
        state.apply(command)
        assert state.canonical_state_json() == _reference_canonical(state)


def test_canonical_equals_reference_on_seeded_run(topo):
    state = BoardState(topo)
    for command in run_scenario(ScenarioConfig(seed=17, ticks=120)):
        try:
            state.apply(command)
        except CommandRejected:
            continue
    assert state.canonical_state_json() == _reference_canonical(state)


def test_state_dict_top_level_shape(boston_state):
    doc = boston_state.state_dict()
    assert set(doc) == {
        "alerts",
        "counters",
        "pipe_refs",
        "pipes",
        "queries",
        "tickets",
        "topology",
        "view",
    }
    assert doc["topology"] == boston_state.topology.digest
    assert [a["id"] for a in doc["alerts"]] == sorted(a["id"] for a in doc["alerts"])
    assert doc["counters"] == {"pipe_seq": 1}


def test_digest_is_sha256_of_canonical(boston_state):
    import hashlib

    want = hashlib.sha256(boston_state.canonical_state_json().encode("utf-8")).hexdigest()
    assert boston_state.digest() == want


# ---------------------------------------------------------------------------
# Rejections leave no trace


def _rejected_commands(state, mk):
    return [
        mk("RaiseAlert", {"alert_id": "pipe-9", "category": "health",
                          "subject": {"kind": "asset", "ref": "bos-ws-01"}, "summary": "x"}),
        mk("RaiseAlert", {"alert_id": "bos-incident-00", "category": "health",
                          "subject": {"kind": "asset", "ref": "bos-ws-01"}, "summary": "dup"}),
        mk("RaiseAlert", {"alert_id": "n-1", "category": "weird",
                          "subject": {"kind": "asset", "ref": "bos-ws-01"}, "summary": "x"}),
        mk("RaiseAlert", {"alert_id": "n-2", "category": "health",
                          "subject": {"kind": "asset", "ref": "ghost"}, "summary": "x"}),
        mk("TaskAlert", {"alert_id": "ghost", "ticket_id": "t-x", "assignee": "a"}),
        mk("TaskAlert", {"alert_id": "bos-incident-00", "ticket_id": "t-y", "assignee": "a"}),
        mk("ResolveAlert", {"alert_id": "ghost"}),
        mk("ReportFlow", {"endpoint_a": "boston", "endpoint_b": "boston",
                          "available_fraction": 0.5, "current_fraction": 0.2}),
        mk("ReportFlow", {"endpoint_a": "boston", "endpoint_b": "ghost",
                          "available_fraction": 0.5, "current_fraction": 0.2}),
        mk("ReportFlow", {"endpoint_a": "boston", "endpoint_b": "sydney",
                          "available_fraction": 1.5, "current_fraction": 0.2}),
        mk("ActivateMission", {"mission_id": "vtc_voip"}, MANAGER),  # already active
        mk("ActivateMission", {"mission_id": "ghost"}, MANAGER),
        mk("DeactivateMission", {"mission_id": "b_docs"}, MANAGER),  # not active
        mk("ActivateQuery", {"query_id": "ghost"}, MANAGER),
        mk("AddTicketNote", {"alert_id": "bos-incident-01", "note": "hi"}),  # no ticket
        mk("AddTicketNote", {"alert_id": "ghost", "note": "hi"}),
        mk("SaveQuery", {"query_id": "q-bad", "label": "x", "expression": "geo:oops",
                         "color": "#101010"}, MANAGER),
        mk("SaveQuery", {"query_id": "q-bad", "label": "x", "expression": 'geo:"x"',
                         "color": "#2a6fbb"}, MANAGER),  # mission color collision
        mk("TaskAlert", {"alert_id": "bos-incident-01", "ticket_id": "tkt-boston-1",
                         "assignee": "a"}),  # duplicate ticket id
        mk("RaiseAlert", {"alert_id": "n-3", "category": "health",
                          "subject": {"kind": "pipe", "ref": "pipe-44"}, "summary": "x"}),
    ]


def test_every_rejection_leaves_canonical_untouched(boston_state, mk):
    before = boston_state.canonical_state_json()
    for command in _rejected_commands(boston_state, mk):
        with pytest.raises(CommandRejected):
            boston_state.apply(command)
        assert boston_state.canonical_state_json() == before, command.kind


def test_reserved_prefix_message(fresh_state, mk):
    with pytest.raises(ValidationError) as err:
        fresh_state.apply(
            mk("RaiseAlert", {"alert_id": f"{RESERVED_ID_PREFIX}1", "category": "health",
                              "subject": {"kind": "asset", "ref": "bos-ws-01"}, "summary": "x"})
        )
    assert "reserved" in str(err.value)


# ---------------------------------------------------------------------------
# Authorization


@pytest.mark.parametrize(
    "kind, payload",
    [
        ("ActivateMission", {"mission_id": "vtc_voip"}),
        ("DeactivateMission", {"mission_id": "vtc_voip"}),
        ("SaveQuery", {"query_id": "q", "label": "l", "expression": 'geo:"x"', "color": "#111111"}),
        ("ActivateQuery", {"query_id": "q"}),
        ("DeactivateQuery", {"query_id": "q"}),
    ],
)
def test_view_controls_need_manager(fresh_state, mk, kind, payload):
    with pytest.raises(AuthorizationError) as err:
        fresh_state.apply(mk(kind, payload, ANALYST))
    assert err.value.reason_code == "authorization"
    assert "manager" in str(err.value)


def test_members_may_run_alert_lifecycle(fresh_state, mk):
    fresh_state.apply(mk("RaiseAlert", {"alert_id": "a-1", "category": "health",
                                        "subject": {"kind": "asset", "ref": "bos-ws-01"},
                                        "summary": "x"}, ANALYST))
    fresh_state.apply(mk("TaskAlert", {"alert_id": "a-1", "ticket_id": "t-1",
                                       "assignee": "analyst-1"}, ANALYST))
    fresh_state.apply(mk("AddTicketNote", {"alert_id": "a-1", "note": "wip"}, ANALYST))
    fresh_state.apply(mk("ResolveAlert", {"alert_id": "a-1"}, ANALYST))
    assert fresh_state.alerts.get("a-1").status is AlertStatus.RESOLVED


# ---------------------------------------------------------------------------
# Flow pipes through commands


def _flow(mk, a="vpn_users", b="sydney", avail=0.55, cur=0.3):
    return mk("ReportFlow", {"endpoint_a": a, "endpoint_b": b,
                             "available_fraction": avail, "current_fraction": cur})


def test_report_flow_allocates_pipe_and_alert(fresh_state, mk):
    fresh_state.apply(_flow(mk))
    pipe = fresh_state.pipes.get("pipe-1")
    assert (pipe.available_bp, pipe.current_bp) == (5500, 3000)
    alert = fresh_state.alerts.get_live("pipe-1.alert")
    assert alert.category.value == "performance"
    assert alert.subject.to_dict() == {"kind": "pipe", "ref": "pipe-1"}
    assert "vpn_users" in alert.summary and "sydney" in alert.summary


def test_report_flow_updates_existing_pair_in_place(fresh_state, mk):
    fresh_state.apply(_flow(mk))
    first_alert = fresh_state.alerts.get_live("pipe-1.alert")
    fresh_state.apply(_flow(mk, a="sydney", b="vpn_users", avail=0.4, cur=0.1))
    assert fresh_state.pipes.get("pipe-2") is None
    pipe = fresh_state.pipes.get("pipe-1")
    assert (pipe.available_bp, pipe.current_bp) == (4000, 1000)
    # The lifecycle alert is untouched by refreshed telemetry.
    assert fresh_state.alerts.get_live("pipe-1.alert") == first_alert


def test_resolving_lifecycle_alert_removes_pipe(fresh_state, mk):
    fresh_state.apply(_flow(mk))
    fresh_state.apply(mk("ResolveAlert", {"alert_id": "pipe-1.alert"}))
    assert fresh_state.pipes.get("pipe-1") is None
    assert fresh_state.pipes.live_pipes() == []
    # The pair is free again and the counter moves on.
    fresh_state.apply(_flow(mk))
    assert fresh_state.pipes.get("pipe-2") is not None


def test_manual_pipe_alert_keeps_endpoints_in_state(fresh_state, mk):
    fresh_state.apply(_flow(mk))
    fresh_state.apply(mk("RaiseAlert", {"alert_id": "watch-1", "category": "security",
                                        "subject": {"kind": "pipe", "ref": "pipe-1"},
                                        "summary": "suspicious flow"}))
    fresh_state.apply(mk("ResolveAlert", {"alert_id": "pipe-1.alert"}))
    doc = fresh_state.state_dict()
    assert doc["pipe_refs"] == {"pipe-1": sorted(["vpn_users", "sydney"])}
    assert fresh_state.alerts.get_live("watch-1") is not None
    # Layer derivation still knows where the gone pipe lived.
    layers = fresh_state.layers()
    assert "watch-1" in {e.alert_id for e in layers.menu}


# ---------------------------------------------------------------------------
# Saved queries


def _save(mk, qid="q-1", color="#101010", expression='geo:"boston"'):
    return mk("SaveQuery", {"query_id": qid, "label": qid.upper(),
                            "expression": expression, "color": color}, MANAGER)


def test_save_query_upsert_preserves_active(fresh_state, mk):
    fresh_state.apply(_save(mk))
    fresh_state.apply(mk("ActivateQuery", {"query_id": "q-1"}, MANAGER))
    fresh_state.apply(_save(mk, expression='geo:"sydney"'))
    q = fresh_state.queries["q-1"]
    assert q.active is True
    from bigboard.query import format_query

    assert format_query(q.expression) == 'geo:"sydney"'
    assert fresh_state.view.active_queries == ("q-1",)


def test_save_query_color_collisions(fresh_state, mk):
    fresh_state.apply(_save(mk))
    with pytest.raises(ValidationError):
        fresh_state.apply(_save(mk, qid="q-2", color="#101010"))
    with pytest.raises(ValidationError):
        fresh_state.apply(_save(mk, qid="q-3", color="#2a6fbb"))  # mission color
    fresh_state.apply(_save(mk, color="#101010"))  # re-saving itself keeps its color


def test_note_author_defaults_to_issuer(fresh_state, mk):
    fresh_state.apply(mk("RaiseAlert", {"alert_id": "a-1", "category": "health",
                                        "subject": {"kind": "asset", "ref": "bos-ws-01"},
                                        "summary": "x"}, ANALYST))
    fresh_state.apply(mk("TaskAlert", {"alert_id": "a-1", "ticket_id": "t-1",
                                       "assignee": "analyst-2"}, ANALYST))
    fresh_state.apply(mk("AddTicketNote", {"alert_id": "a-1", "note": "mine"}, ANALYST))
    fresh_state.apply(mk("AddTicketNote", {"alert_id": "a-1", "note": "theirs",
                                           "author": "analyst-9"}, ANALYST))
    notes = fresh_state.alerts.ticket_for_alert("a-1").notes
    assert [n["author"] for n in notes] == [ANALYST.client_id, "analyst-9"]


# ---------------------------------------------------------------------------
# Snapshot restore


def test_snapshot_round_trip_preserves_digest(topo, boston_state, mk):
    boston_state.apply(mk("RaiseAlert", {"alert_id": "watch-1", "category": "security",
                                         "subject": {"kind": "pipe", "ref": "pipe-1"},
                                         "summary": "sus"}))
    boston_state.apply(mk("ResolveAlert", {"alert_id": "pipe-1.alert"}))
    doc = boston_state.state_dict()
    clone = BoardState.from_state_dict(topo, doc)
    assert clone.digest() == boston_state.digest()
    assert clone.canonical_state_json() == boston_state.canonical_state_json()
    # The clone keeps evolving identically.
    follow = mk("TaskAlert", {"alert_id": "watch-1", "ticket_id": "t-9", "assignee": "a"})
    clone.apply(follow)
    boston_state.apply(follow)
    assert clone.digest() == boston_state.digest()


def test_snapshot_restore_checks_topology(boston_state):
    doc = boston_state.state_dict()
    doc["topology"] = "0" * 64
    with pytest.raises(ValidationError):
        BoardState.from_state_dict(boston_state.topology, doc)


def test_transition_error_is_a_rejection(fresh_state, mk):
    fresh_state.apply(mk("RaiseAlert", {"alert_id": "a-1", "category": "health",
                                        "subject": {"kind": "asset", "ref": "bos-ws-01"},
                                        "summary": "x"}))
    fresh_state.apply(mk("TaskAlert", {"alert_id": "a-1", "ticket_id": "t-1", "assignee": "a"}))
    with pytest.raises(TransitionError):
        fresh_state.apply(mk("TaskAlert", {"alert_id": "a-1", "ticket_id": "t-2", "assignee": "b"}))
    assert isinstance(TransitionError("x"), CommandRejected)


def test_role_enum_values():
    assert {r.value for r in Role} == {"manager", "member"}
    assert ClientIdentity.from_dict({"client_id": "x", "role": "member"}).role is Role.MEMBER
    assert {k.value for k in CommandKind} >= {"RaiseAlert", "ReportFlow", "SaveQuery"}
