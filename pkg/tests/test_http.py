from __future__ import annotations

import json
import threading
import time

import pytest

from bigboard.client import BoardClient, LocalBoard, ServerUnavailable
from bigboard.errors import ValidationError
from bigboard.scenario import make_boston_fixture

from conftest import MANAGER_TOKEN, MEMBER_TOKEN

T0 = 1356998400000


def _member(http_board, client_id="console-1"):
    return BoardClient(http_board.addr, MEMBER_TOKEN, client_id)


def _manager(http_board, client_id="wall-console"):
    return BoardClient(http_board.addr, MANAGER_TOKEN, client_id)


def _raise_record(client, n=1):
    return client.make_command(
        "RaiseAlert",
        {"alert_id": f"h-{n}", "category": "health",
         "subject": {"kind": "asset", "ref": "bos-ws-01"}, "summary": "s"},
        at=T0 + n,
        command_id=f"http-{n}",
    )


# ---------------------------------------------------------------------------
# Auth and liveness


def test_health_needs_no_token(http_board):
    client = BoardClient(http_board.addr, "totally-wrong", "nobody")
    body = client.health()
    assert body["status"] == "ok"
    assert body["seq"] == 0
    client.close()


def test_everything_else_needs_a_token(http_board):
    import http.client as hc

    conn = hc.HTTPConnection("127.0.0.1", int(http_board.addr.split(":")[1]), timeout=5)
    for method, path in [("GET", "/snapshot"), ("GET", "/deltas?from=1"), ("POST", "/command")]:
        conn.request(method, path, body=b"{}" if method == "POST" else None)
        response = conn.getresponse()
        assert response.status == 401
        response.read()
    conn.close()


def test_wrong_token_is_401(http_board):
    client = BoardClient(http_board.addr, "bad-token", "nobody")
    with pytest.raises(ServerUnavailable):
        client.snapshot()
    client.close()


def test_unknown_route_is_404(http_board):
    client = _member(http_board)
    status, body = client._request("GET", "/nope")
    assert status == 404
    client.close()


# ---------------------------------------------------------------------------
# Single-command submission


def test_submit_and_duplicate(http_board):
    client = _member(http_board)
    record = _raise_record(client)
    first = client.submit_record(record)
    assert first["delta"]["seq"] == 1
    assert first["delta"]["outcome"] == {"accepted": True}
    assert first["duplicate"] is False

    again = client.submit_record(record)
    assert again["delta"] == first["delta"]
    assert again["duplicate"] is True
    assert http_board.board.seq == 1
    client.close()


def test_malformed_json_is_400(http_board):
    client = _member(http_board)
    status, body = client._request("POST", "/command", b"{nope")
    assert status == 400
    assert "error" in body
    client.close()


def test_unparseable_command_is_400(http_board):
    client = _member(http_board)
    with pytest.raises(ValidationError):
        client.submit_record({"command_id": "", "kind": "RaiseAlert"})
    assert http_board.board.seq == 0
    client.close()


def test_state_rejection_is_sequenced_not_400(http_board):
    client = _member(http_board)
    record = client.make_command("ResolveAlert", {"alert_id": "ghost"}, at=T0)
    answer = client.submit_record(record)
    outcome = answer["delta"]["outcome"]
    assert outcome["accepted"] is False
    assert outcome["reason_code"] == "validation"
    assert http_board.board.seq == 1
    client.close()


def test_member_view_control_is_sequenced_authorization_rejection(http_board):
    client = _member(http_board)
    record = client.make_command("ActivateMission", {"mission_id": "vtc_voip"}, at=T0)
    answer = client.submit_record(record)
    outcome = answer["delta"]["outcome"]
    assert outcome["accepted"] is False
    assert outcome["reason_code"] == "authorization"
    client.close()


def test_manager_view_control_accepted(http_board):
    client = _manager(http_board)
    record = client.make_command("ActivateMission", {"mission_id": "vtc_voip"}, at=T0)
    answer = client.submit_record(record)
    assert answer["delta"]["outcome"] == {"accepted": True}
    assert http_board.board.state.view.active_missions == ("vtc_voip",)
    client.close()


def test_role_claim_must_match_token(http_board):
    client = _member(http_board)
    record = client.make_command(
        "ActivateMission", {"mission_id": "vtc_voip"}, at=T0, role="manager"
    )
    answer = client.submit_record(record)
    outcome = answer["delta"]["outcome"]
    assert outcome["accepted"] is False
    assert outcome["reason_code"] == "authorization"
    assert "token grants" in outcome["reason"]
    client.close()


def test_missing_role_is_stamped_from_token(http_board):
    client = _manager(http_board)
    record = client.make_command("ActivateMission", {"mission_id": "vtc_voip"}, at=T0)
    assert "role" not in record["issuer"]
    answer = client.submit_record(record)
    assert answer["delta"]["command"]["issuer"]["role"] == "manager"
    client.close()


# ---------------------------------------------------------------------------
# Batch submission


def test_batch_mixed_results(http_board):
    client = _member(http_board)
    records = [_raise_record(client, n) for n in range(1, 4)]
    records.insert(2, {"command_id": "", "kind": "??"})  # unparseable line
    records.append(client.make_command("ResolveAlert", {"alert_id": "ghost"}, at=T0))
    results = client.submit_batch(records)
    assert len(results) == 5
    assert results[0]["delta"]["outcome"]["accepted"] is True
    assert results[1]["delta"]["outcome"]["accepted"] is True
    assert "error" in results[2]
    assert results[3]["delta"]["outcome"]["accepted"] is True
    assert results[4]["delta"]["outcome"]["accepted"] is False
    # Bad lines consume no sequence numbers; the rest are ordered.
    assert http_board.board.seq == 4
    client.close()


# ---------------------------------------------------------------------------
# Snapshot and delta streaming


def test_snapshot_boots_a_replica(http_board):
    client = _member(http_board)
    for record in [_raise_record(client, n) for n in range(1, 4)]:
        client.submit_record(record)
    snapshot = client.snapshot()
    replica = LocalBoard.from_snapshot(snapshot)
    assert replica.seq == 3
    assert replica.digest() == http_board.board.state.digest()
    client.close()


def test_stream_delivers_backlog_then_live(http_board):
    client = _member(http_board)
    client.submit_record(_raise_record(client, 1))
    client.submit_record(_raise_record(client, 2))

    seen: list[int] = []
    done = threading.Event()

    def consume():
        for record in client.stream_deltas(from_seq=1):
            seen.append(record["seq"])
            if len(seen) == 3:
                break
        done.set()

    thread = threading.Thread(target=consume, daemon=True)
    thread.start()
    deadline = time.monotonic() + 5
    while len(seen) < 2 and time.monotonic() < deadline:
        time.sleep(0.01)
    client.submit_record(_raise_record(client, 3))
    assert done.wait(timeout=5)
    assert seen == [1, 2, 3]
    client.close()


def test_streamed_records_replay_into_a_replica(http_board, topo):
    manager = _manager(http_board)
    for command in make_boston_fixture():
        record = command.to_record()
        del record["issuer"]["role"]
        token = MANAGER_TOKEN if command.issuer.role.value == "manager" else MEMBER_TOKEN
        via = BoardClient(http_board.addr, token, command.issuer.client_id)
        via.submit_record(record)
        via.close()

    replica = LocalBoard.fresh(topo)
    count = 0
    for record in manager.stream_deltas(from_seq=1):
        replica.apply_delta(record)
        count += 1
        if count == http_board.board.seq:
            break
    assert replica.digest() == http_board.board.state.digest()
    manager.close()


def test_second_manager_stream_is_409(http_board):
    manager = _manager(http_board)
    stream = manager.stream_deltas(from_seq=1)
    # The slot is claimed once the response headers arrive; force that by
    # submitting one delta and reading it.
    member = _member(http_board)
    member.submit_record(_raise_record(member, 1))
    assert next(stream)["seq"] == 1

    rival = _manager(http_board, client_id="second-wall")
    with pytest.raises(ServerUnavailable) as err:
        next(rival.stream_deltas(from_seq=1))
    assert "409" in str(err.value) or "already streaming" in str(err.value)

    # Member streams are not limited.
    other = _member(http_board, client_id="console-2")
    member_stream = other.stream_deltas(from_seq=1)
    assert next(member_stream)["seq"] == 1
    manager.close()
    member.close()
    other.close()


def test_deltas_from_parameter_skips_history(http_board):
    client = _member(http_board)
    for n in range(1, 5):
        client.submit_record(_raise_record(client, n))
    stream = client.stream_deltas(from_seq=3)
    assert next(stream)["seq"] == 3
    assert next(stream)["seq"] == 4
    client.close()


def test_keep_alive_reuses_one_connection(http_board):
    client = _member(http_board)
    client.health()
    first_conn = client._conn
    client.submit_record(_raise_record(client, 1))
    client.snapshot()
    assert client._conn is first_conn
    client.close()
