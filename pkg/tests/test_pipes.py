from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bigboard.alerts import Alert, AlertCategory, AlertStatus, Subject, SubjectKind
from bigboard.errors import ValidationError
from bigboard.pipes import Pipe, PipeColor, PipeStore, pipe_color, quantize_fraction, visible_pipes

T0 = 1356998400000


def _pipe(pid="pipe-1", a="vpn_users", b="sydney", avail=5500, cur=3000):
    return Pipe(
        id=pid,
        endpoint_a=a,
        endpoint_b=b,
        available_bp=avail,
        current_bp=cur,
        alert_id=f"{pid}.alert",
    )


def _pipe_alert(pipe, status=AlertStatus.UNASSIGNED, raised_at=T0):
    return Alert(
        id=pipe.alert_id,
        category=AlertCategory.PERFORMANCE,
        status=status,
        subject=Subject(SubjectKind.PIPE, pipe.id),
        summary="degraded flow",
        raised_at=raised_at,
        status_changed_at=raised_at,
    )


# ---------------------------------------------------------------------------
# Quantization


def test_quantize_basics():
    assert quantize_fraction(0.0, "f") == 0
    assert quantize_fraction(1.0, "f") == 10000
    assert quantize_fraction(0.55, "f") == 5500
    assert quantize_fraction(0.12345, "f") == 1234  # round-half-even at the 5th place
    assert quantize_fraction(1, "f") == 10000


@pytest.mark.parametrize("bad", [-0.01, 1.01, float("nan"), float("inf"), "0.5", None, True])
def test_quantize_rejects_out_of_domain(bad):
    with pytest.raises(ValidationError):
        quantize_fraction(bad, "f")


@given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
def test_quantize_is_within_half_a_basis_point(value):
    bp = quantize_fraction(value, "f")
    assert 0 <= bp <= 10000
    assert abs(bp - value * 10000) <= 0.5


# ---------------------------------------------------------------------------
# Pipe objects and the store


def test_pipe_canonical_and_fractions():
    pipe = _pipe()
    assert pipe.canonical == json.dumps(pipe.to_dict(), sort_keys=True, separators=(",", ":"))
    assert pipe.available_fraction == 0.55
    assert pipe.current_fraction == 0.30
    assert pipe.pair == frozenset({"vpn_users", "sydney"})


def test_store_pair_is_unordered():
    store = PipeStore()
    store.add(_pipe())
    assert store.find_by_pair("sydney", "vpn_users").id == "pipe-1"
    assert store.find_by_pair("vpn_users", "sydney").id == "pipe-1"
    assert store.find_by_pair("boston", "sydney") is None
    with pytest.raises(ValidationError):
        store.add(_pipe(pid="pipe-2", a="sydney", b="vpn_users"))


def test_store_never_reuses_ids():
    store = PipeStore()
    store.add(_pipe())
    store.remove("pipe-1")
    assert store.get("pipe-1") is None
    assert store.endpoint_map["pipe-1"] == ("vpn_users", "sydney")
    with pytest.raises(ValidationError):
        store.add(_pipe())  # same id again


def test_store_update_and_lookup():
    store = PipeStore()
    store.add(_pipe())
    updated = store.update_bands("pipe-1", 4000, 2000)
    assert (updated.available_bp, updated.current_bp) == (4000, 2000)
    assert store.get("pipe-1") == updated
    assert store.pipe_for_alert("pipe-1.alert") == updated
    assert store.pipe_for_alert("other") is None


def test_register_endpoints_for_snapshot_restore():
    store = PipeStore()
    store.register_endpoints("pipe-7", "boston", "london")
    assert store.endpoint_map["pipe-7"] == ("boston", "london")
    assert store.get("pipe-7") is None


def test_pipe_color_tracks_alert_status():
    pipe = _pipe()
    assert pipe_color(pipe, {pipe.alert_id: _pipe_alert(pipe)}) is PipeColor.RED
    tasked = _pipe_alert(pipe, AlertStatus.TASKED)
    assert pipe_color(pipe, {pipe.alert_id: tasked}) is PipeColor.YELLOW


# ---------------------------------------------------------------------------
# Mission filtering


def test_visible_pipes_all_when_no_mission(topo):
    p1 = _pipe("pipe-1", "vpn_users", "sydney")
    p2 = _pipe("pipe-2", "net_defense", "dns")
    alerts = {
        p1.alert_id: _pipe_alert(p1, raised_at=T0 + 5),
        p2.alert_id: _pipe_alert(p2, raised_at=T0),
    }
    got = visible_pipes([p1, p2], alerts, (), topo)
    assert [p.id for p in got] == ["pipe-2", "pipe-1"]  # oldest problem first


def test_visible_pipes_filtered_by_active_missions(topo):
    p1 = _pipe("pipe-1", "vpn_users", "sydney")  # touches vtc_voip deps
    p2 = _pipe("pipe-2", "net_defense", "dc_storage")  # touches none of vtc_voip
    alerts = {p.alert_id: _pipe_alert(p) for p in (p1, p2)}
    got = visible_pipes([p1, p2], alerts, ("vtc_voip",), topo)
    assert [p.id for p in got] == ["pipe-1"]

    # Brute-force the rule: an endpoint sub-zone must contain a dependency asset.
    dep_sub_zones = {
        topo.assets_by_id[aid].sub_zone_id
        for aid in topo.missions_by_id["vtc_voip"].dependency_asset_ids
    }
    for pipe in (p1, p2):
        expect = pipe.endpoint_a in dep_sub_zones or pipe.endpoint_b in dep_sub_zones
        assert (pipe in got) == expect
