#!/usr/bin/env python3
"""Capture query-expression canonicalization vectors from a live board server.

Each raw expression is submitted as a SaveQuery command; the server stores
the canonically reformatted text, which we read back from /snapshot. Invalid
expressions are expected to produce sequenced rejections whose reasons we
record. Talks HTTP only — no imports from the board package.
"""

from __future__ import annotations

import json
import sys
import urllib.request

VALID = [
    'geo:"boston"',
    'GEO:"Boston"',
    'geo:"a" or tag:"b" and not host:"c*"',
    '(geo:"a" or tag:"b") and host:"c"',
    '((geo:"a"))',
    'not not geo:"a"',
    'not (geo:"a" and tag:"b")',
    'geo:"a" and (tag:"b" and host:"c")',
    'geo:"a" or tag:"b" or host:"c"',
    'geo:"a" or (tag:"b" or host:"c")',
    'ip:10.1.2.3',
    'ip:10.1.2.3/24',
    'ip:194.220.1.0/255.255.255.0',
    'ip:194.220.1.77/0.0.0.255',
    'ip:8.8.8.8/0',
    'ip:255.255.255.255/32',
    'host:"WEB-*"',
    'tag:"with \\"quotes\\" inside"',
    'tag:"back\\\\slash"',
    'geo:"emoji ✈ value"',
    'not geo:"a" and tag:"b"',
    'not (geo:"a" or tag:"b") and host:"x?"',
    '  geo:"a"   and\ttag:"b" ',
    'host:"[a-z]??-*"',
    'tag:"\\a\\b"',
    'geo:"sydney" OR geo:"melbourne" OR geo:"tokyo" AND tag:"voip"',
    'not (not (geo:"a" and not tag:"b") or host:"c")',
    '(ip:10.0.0.0/8 and not ip:10.1.0.0/16) or host:"edge-[0-9]"',
    'ip:0.0.0.0/0',
    'tag:"multi word  spaced"',
    'host:"case[!A-Z]end"',
]

INVALID = [
    'geo:boston',
    'ip:"10.0.0.1"',
    'geo:"a" and',
    '(geo:"a"',
    'ip:10.0.0.1/33',
    'ip:1.2.3',
    'ip:1.2.3.4/24/8',
    'ip:010.1.2.3',
    'ip:10.0.0.1/255.0.255.0',
    'geo:"a" tag:"b"',
    'foo:"bar"',
    'geo:"unterminated',
    '',
    'and geo:"a"',
    'geo:"a" or or tag:"b"',
]


def post_command(base: str, token: str, record: dict) -> dict:
    req = urllib.request.Request(
        base + "/command",
        data=json.dumps(record).encode("utf-8"),
        headers={
            "Authorization": "Bearer " + token,
            "Content-Type": "application/json",
        },
        method="POST",
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read().decode("utf-8"))


def get_snapshot(base: str, token: str) -> dict:
    req = urllib.request.Request(
        base + "/snapshot", headers={"Authorization": "Bearer " + token}
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read().decode("utf-8"))


def main() -> int:
    addr, token, out_path = sys.argv[1], sys.argv[2], sys.argv[3]
    base = "http://" + addr
    at = 1_500_000_000_000

    for i, raw in enumerate(VALID):
        qid = f"qfmt-{i:02d}"
        record = {
            "command_id": f"qfmt-save-{i:02d}",
            "issuer": {"client_id": "vector-capture"},
            "kind": "SaveQuery",
            "payload": {
                "query_id": qid,
                "label": f"vector {i:02d}",
                "expression": raw,
                "color": f"#0b0b{i:02x}",
            },
            "at": at + i * 1000,
        }
        answer = post_command(base, token, record)
        outcome = answer["delta"]["outcome"]
        if not outcome["accepted"]:
            print(f"vector {i} unexpectedly rejected: {outcome['reason']}", file=sys.stderr)
            print(f"  raw: {raw!r}", file=sys.stderr)
            return 1

    rejects = []
    for i, raw in enumerate(INVALID):
        record = {
            "command_id": f"qfmt-bad-{i:02d}",
            "issuer": {"client_id": "vector-capture"},
            "kind": "SaveQuery",
            "payload": {
                "query_id": f"qbad-{i:02d}",
                "label": f"bad {i:02d}",
                "expression": raw,
                "color": f"#0c0c{i:02x}",
            },
            "at": at + 500_000 + i * 1000,
        }
        answer = post_command(base, token, record)
        outcome = answer["delta"]["outcome"]
        if outcome["accepted"]:
            print(f"invalid vector {i} unexpectedly accepted: {raw!r}", file=sys.stderr)
            return 1
        rejects.append(
            {
                "raw": raw,
                "reason_code": outcome["reason_code"],
                "reason": outcome["reason"],
            }
        )

    snapshot = get_snapshot(base, token)
    stored = snapshot["state"]["queries"]
    by_id = {q["id"]: q for q in stored}
    vectors = []
    for i, raw in enumerate(VALID):
        qid = f"qfmt-{i:02d}"
        if qid not in by_id:
            print(f"query {qid} missing from snapshot", file=sys.stderr)
            return 1
        vectors.append({"raw": raw, "canonical": by_id[qid]["expression"]})

    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({"vectors": vectors, "rejects": rejects}, fh, indent=1, ensure_ascii=True)
        fh.write("\n")
    print(f"wrote {len(vectors)} format vectors and {len(rejects)} rejects to {out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
