"""bigboard command line: run the server, drive it, and render the board.

Exit codes: 0 success, 2 usage or local input error, 3 server unreachable,
4 command rejected by the server.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
import time
from pathlib import Path

from .client import BoardClient, LocalBoard, ServerUnavailable
from .config import load_config
from .errors import BigBoardError, CommandRejected
from .journal import Journal
from .render import render_board_svg, render_text
from .scenario import (
    ScenarioConfig,
    generate_fixture,
    make_boston_fixture,
    run_scenario,
    stream_bytes,
)
from .server import BoardHTTPServer, BoardServer
from .state import BoardState
from .topology import load_topology

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNREACHABLE = 3
EXIT_REJECTED = 4


def _now_ms() -> int:
    return int(time.time() * 1000)


def _client(args) -> BoardClient:
    token = args.token or os.environ.get("BIGBOARD_TOKEN", "")
    if not token:
        raise SystemExit("a bearer token is required (--token or BIGBOARD_TOKEN)")
    addr = args.addr or os.environ.get("BIGBOARD_ADDR", "127.0.0.1:8642")
    return BoardClient(addr=addr, token=token, client_id=args.client_id)


def _submit(args, kind: str, payload: dict) -> int:
    client = _client(args)
    record = client.make_command(
        kind,
        payload,
        at=args.at if args.at is not None else _now_ms(),
        command_id=args.command_id,
    )
    answer = client.submit_record(record)
    delta = answer["delta"]
    outcome = delta["outcome"]
    dup = " (duplicate)" if answer.get("duplicate") else ""
    if outcome["accepted"]:
        print(f"seq {delta['seq']} accepted{dup}")
        return EXIT_OK
    print(f"seq {delta['seq']} rejected: {outcome['reason']}{dup}", file=sys.stderr)
    return EXIT_REJECTED


# -- commands ---------------------------------------------------------------


def _cmd_serve(args) -> int:
    config = load_config(args.config)
    topology = (
        load_topology(config.topology) if config.topology else load_topology(generate_fixture())
    )
    journal = Journal(config.journal, fsync=config.fsync) if config.journal else None
    board = BoardServer(topology, journal)
    host, _, port = config.listen.partition(":")
    httpd = BoardHTTPServer((host, int(port)), board, config.manager_token, config.member_token)
    print(f"serving {topology.network_name} on {config.listen} (seq {board.seq})")

    def stop(signum, frame):
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, stop)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.shutdown()
        httpd.server_close()
        board.close()
    return EXIT_OK


def _cmd_fixture(args) -> int:
    text = json.dumps(generate_fixture(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return EXIT_OK


def _cmd_health(args) -> int:
    body = _client(args).health()
    print(json.dumps(body, sort_keys=True))
    return EXIT_OK


def _render(board_state: BoardState, seq: int, args) -> int:
    if args.format == "json":
        text = json.dumps(
            {"seq": seq, "digest": board_state.digest(), "state": board_state.state_dict()},
            sort_keys=True, indent=2,
        )
        if args.out:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        else:
            print(text)
    elif args.format == "svg":
        if not args.out:
            raise SystemExit("--format svg needs --out FILE")
        render_board_svg(board_state, seq, args.out, tick=args.tick, window_size=args.window)
        print(f"wrote {args.out}")
    else:
        text = render_text(board_state, seq)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    return EXIT_OK


def _cmd_snapshot(args) -> int:
    snapshot = _client(args).snapshot()
    board = LocalBoard.from_snapshot(snapshot)
    return _render(board.state, board.seq, args)


def _cmd_replay(args) -> int:
    topology = (
        load_topology(args.topology) if args.topology else load_topology(generate_fixture())
    )
    journal = Journal(args.journal)
    try:
        board = BoardServer(topology, journal)
    finally:
        journal.close()
    return _render(board.state, board.seq, args)


def _cmd_watch(args) -> int:
    client = _client(args)
    seen = 0
    try:
        for record in client.stream_deltas(args.from_seq):
            print(json.dumps(record, sort_keys=True), flush=True)
            seen += 1
            if args.count and seen >= args.count:
                break
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _cmd_raise(args) -> int:
    return _submit(args, "RaiseAlert", {
        "alert_id": args.alert_id,
        "category": args.category,
        "subject": {"kind": args.subject_kind, "ref": args.subject_ref},
        "summary": args.summary,
    })


def _cmd_task(args) -> int:
    return _submit(args, "TaskAlert", {
        "alert_id": args.alert_id,
        "ticket_id": args.ticket_id,
        "assignee": args.assignee,
    })


def _cmd_resolve(args) -> int:
    return _submit(args, "ResolveAlert", {"alert_id": args.alert_id})


def _cmd_flow(args) -> int:
    return _submit(args, "ReportFlow", {
        "endpoint_a": args.endpoint_a,
        "endpoint_b": args.endpoint_b,
        "available_fraction": args.available,
        "current_fraction": args.current,
    })


def _cmd_note(args) -> int:
    payload = {"alert_id": args.alert_id, "note": args.text}
    if args.author:
        payload["author"] = args.author
    return _submit(args, "AddTicketNote", payload)


def _cmd_mission(args) -> int:
    kind = "ActivateMission" if args.action == "activate" else "DeactivateMission"
    return _submit(args, kind, {"mission_id": args.mission_id})


def _cmd_query(args) -> int:
    if args.action == "save":
        if not (args.label and args.expression and args.color):
            raise SystemExit("query save needs --label, --expression, and --color")
        return _submit(args, "SaveQuery", {
            "query_id": args.query_id,
            "label": args.label,
            "expression": args.expression,
            "color": args.color,
        })
    kind = "ActivateQuery" if args.action == "activate" else "DeactivateQuery"
    return _submit(args, kind, {"query_id": args.query_id})


def _cmd_simulate(args) -> int:
    if args.boston:
        commands = make_boston_fixture()
    else:
        commands = run_scenario(ScenarioConfig(seed=args.seed, ticks=args.ticks))
    if not args.submit:
        sys.stdout.buffer.write(stream_bytes(commands))
        return EXIT_OK
    client = _client(args)
    accepted = rejected = 0
    # The stream carries scripted issuers; submitting under one token means
    # the server stamps every record with that token's role, so drop the
    # scripted role rather than submit guaranteed mismatches.
    records = []
    for c in commands:
        record = c.to_record()
        record["issuer"] = {"client_id": record["issuer"]["client_id"]}
        records.append(record)
    for i in range(0, len(records), args.batch):
        for result in client.submit_batch(records[i : i + args.batch]):
            if "delta" not in result:
                rejected += 1
            elif result["delta"]["outcome"]["accepted"]:
                accepted += 1
            else:
                rejected += 1
    print(f"submitted {len(records)} commands: {accepted} accepted, {rejected} rejected")
    return EXIT_OK


# -- wiring -------------------------------------------------------------------


def _add_client_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--addr", default=None, help="server host:port (or BIGBOARD_ADDR)")
    parser.add_argument("--token", default=None, help="bearer token (or BIGBOARD_TOKEN)")
    parser.add_argument("--client-id", default="cli", help="issuer client id")
    parser.add_argument("--command-id", default=None, help="idempotency id (re-use to retry)")
    parser.add_argument("--at", type=int, default=None, help="event time, ms since epoch")


def _add_render_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("text", "svg", "json"), default="text")
    parser.add_argument("--out", default=None, help="output file (required for svg)")
    parser.add_argument("--tick", type=int, default=0, help="menu scroll tick")
    parser.add_argument("--window", type=int, default=4, help="menu rows per category")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bigboard",
        description="network operations big board: server, console commands, rendering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the authoritative board server")
    p.add_argument("--config", default=None, help="JSON config file")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("fixture", help="print the built-in exercise topology")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_fixture)

    p = sub.add_parser("health", help="ping the server")
    _add_client_args(p)
    p.set_defaults(func=_cmd_health)

    p = sub.add_parser("snapshot", help="fetch and render the current board")
    _add_client_args(p)
    _add_render_args(p)
    p.set_defaults(func=_cmd_snapshot)

    p = sub.add_parser("replay", help="rebuild a board from a journal file and render it")
    p.add_argument("--journal", required=True)
    p.add_argument("--topology", default=None, help="topology JSON (default: built-in fixture)")
    _add_render_args(p)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("watch", help="stream deltas as NDJSON")
    _add_client_args(p)
    p.add_argument("--from", dest="from_seq", type=int, default=1)
    p.add_argument("--count", type=int, default=0, help="stop after N deltas (0 = forever)")
    p.set_defaults(func=_cmd_watch)

    p = sub.add_parser("raise", help="raise an alert")
    _add_client_args(p)
    p.add_argument("--alert-id", required=True)
    p.add_argument("--category", required=True, choices=("health", "security", "performance"))
    p.add_argument("--subject-kind", required=True, choices=("asset", "subzone", "pipe"))
    p.add_argument("--subject-ref", required=True)
    p.add_argument("--summary", required=True)
    p.set_defaults(func=_cmd_raise)

    p = sub.add_parser("task", help="task an alert to an operator, opening a ticket")
    _add_client_args(p)
    p.add_argument("--alert-id", required=True)
    p.add_argument("--ticket-id", required=True)
    p.add_argument("--assignee", required=True)
    p.set_defaults(func=_cmd_task)

    p = sub.add_parser("resolve", help="resolve an alert")
    _add_client_args(p)
    p.add_argument("--alert-id", required=True)
    p.set_defaults(func=_cmd_resolve)

    p = sub.add_parser("flow", help="report a degraded flow between two sub-zones")
    _add_client_args(p)
    p.add_argument("--endpoint-a", required=True)
    p.add_argument("--endpoint-b", required=True)
    p.add_argument("--available", type=float, required=True)
    p.add_argument("--current", type=float, required=True)
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("note", help="append a note to an alert's ticket")
    _add_client_args(p)
    p.add_argument("--alert-id", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--author", default=None)
    p.set_defaults(func=_cmd_note)

    p = sub.add_parser("mission", help="toggle a mission area on the shared view")
    _add_client_args(p)
    p.add_argument("action", choices=("activate", "deactivate"))
    p.add_argument("mission_id")
    p.set_defaults(func=_cmd_mission)

    p = sub.add_parser("query", help="save or toggle a functional overlay query")
    _add_client_args(p)
    p.add_argument("action", choices=("save", "activate", "deactivate"))
    p.add_argument("query_id")
    p.add_argument("--label", default=None)
    p.add_argument("--expression", default=None)
    p.add_argument("--color", default=None)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("simulate", help="emit (or submit) a deterministic command stream")
    _add_client_args(p)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--ticks", type=int, default=600)
    p.add_argument("--boston", action="store_true", help="use the scripted walkthrough")
    p.add_argument("--submit", action="store_true", help="send to the server instead of stdout")
    p.add_argument("--batch", type=int, default=500)
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ServerUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except CommandRejected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except BigBoardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(f"error: {exc.code}", file=sys.stderr)
            return EXIT_USAGE
        raise
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
