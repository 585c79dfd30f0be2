#!/usr/bin/env python3
"""Freeze canonical-encoding vectors for the console's test suite.

Uses only the standard library: the canonical form is, by definition,
json.dumps(value, sort_keys=True, separators=(",", ":")) with default
ASCII escaping, digested with SHA-256. The console's encoder must hit
these bytes exactly or replica digests can never match the server.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

VALUES = [
    {},
    [],
    "",
    0,
    -1,
    1234567890123,
    True,
    False,
    None,
    [1, 2, 3],
    {"b": 1, "a": 2, "A": 3, "_": 4},
    "hello",
    "naïve café",
    "日本語テキスト",
    "emoji \U0001f39b️\U0001f6f0️",
    "tab\tnewline\nret\rquote\"backslash\\",
    " ",
    "mixed ascii ünicode \U0001f680 end",
    "\U0001f600",
    "￿￾",
    "   line separators",
    "controls \x08\x0c done",
    "private use  vs astral \U0001f680",
    {"alerts": [{"id": "a", "n": None, "ok": True}], "view": {"x": [1, 2, 3]}},
    {"é": 1, "e": 2, "\U0001f680": 3, "z": 4},
    {"": 1, "\U0001f680": 2},
    {"": 1, "\U0001f680": 2},
    {"nested": {"deep": [{"k": "v"}, [], {}, [""]]}},
    ["\\", "\"", "/", "~"],
]


def main() -> int:
    out_path = Path(sys.argv[1])
    vectors = []
    for value in VALUES:
        canonical = json.dumps(value, sort_keys=True, separators=(",", ":"))
        vectors.append(
            {
                "value": value,
                "canonical": canonical,
                "sha256": hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
            }
        )
    out_path.write_text(json.dumps(vectors, indent=1, ensure_ascii=True) + "\n", encoding="utf-8")
    print(f"wrote {len(vectors)} canonical vectors to {out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
