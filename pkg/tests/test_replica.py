from __future__ import annotations

import pytest

from bigboard.client import LocalBoard
from bigboard.errors import DeltaGapError, ReplicaDivergence
from bigboard.scenario import ScenarioConfig, fixture_topology, make_boston_fixture, run_scenario
from bigboard.server import BoardServer


def _loaded_server(extra_ticks=0, seed=19):
    board = BoardServer(fixture_topology())
    for command in make_boston_fixture():
        board.submit(command)
    if extra_ticks:
        for command in run_scenario(ScenarioConfig(seed=seed, ticks=extra_ticks)):
            board.submit(command)
    return board


def test_fresh_replica_follows_the_full_stream(topo):
    board = _loaded_server(extra_ticks=80)
    replica = LocalBoard.fresh(topo)
    for record in board.delta_records(1):
        delta = replica.apply_delta(record)
        assert delta is not None
        assert replica.digest() == delta.digest
    assert replica.seq == board.seq
    assert replica.digest() == board.state.digest()


def test_checkout_replica_joins_midstream():
    board = _loaded_server()
    snapshot = board.checkout()
    for command in run_scenario(ScenarioConfig(seed=23, ticks=60)):
        board.submit(command)

    replica = LocalBoard.from_snapshot(snapshot)
    assert replica.seq == snapshot["seq"]
    assert replica.digest() == snapshot["digest"]
    for record in board.delta_records(replica.seq + 1):
        replica.apply_delta(record)
    assert replica.digest() == board.state.digest()


def test_replica_skips_already_seen_deltas():
    board = _loaded_server()
    snapshot = board.checkout()
    replica = LocalBoard.from_snapshot(snapshot)
    # Deltas at or below the checkout seq are old news, not errors.
    for record in board.delta_records(1):
        assert replica.apply_delta(record) is None
    assert replica.seq == snapshot["seq"]


def test_replica_raises_on_gap():
    board = _loaded_server()
    replica = LocalBoard.from_snapshot(board.checkout())
    board.submit(run_scenario(ScenarioConfig(seed=3, ticks=5))[0])
    board.submit(run_scenario(ScenarioConfig(seed=3, ticks=5))[1])
    records = board.delta_records(replica.seq + 1)
    with pytest.raises(DeltaGapError):
        replica.apply_delta(records[1])


def test_replica_raises_on_divergence():
    board = _loaded_server()
    replica = LocalBoard.from_snapshot(board.checkout())
    board.submit(run_scenario(ScenarioConfig(seed=3, ticks=5))[0])
    record = board.delta_records(replica.seq + 1)[0]
    record["digest"] = "0" * 64
    with pytest.raises(ReplicaDivergence):
        replica.apply_delta(record)


def test_snapshot_digest_is_verified():
    board = _loaded_server()
    snapshot = board.checkout()
    snapshot["digest"] = "0" * 64
    with pytest.raises(ReplicaDivergence):
        LocalBoard.from_snapshot(snapshot)


def test_rejected_deltas_advance_seq_without_state_change():
    board = _loaded_server()
    replica = LocalBoard.from_snapshot(board.checkout())
    before = replica.digest()
    bad = run_scenario(ScenarioConfig(seed=3, ticks=5, invalid_rate=1.0))
    rejected = next(c for c in bad if c.payload.get("alert_id", "").startswith("missing-"))
    delta, _ = board.submit(rejected)
    assert not delta.accepted
    applied = replica.apply_delta(delta.to_record())
    assert applied is not None
    assert replica.seq == delta.seq
    assert replica.digest() == before
