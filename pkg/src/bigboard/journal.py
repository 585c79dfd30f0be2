"""Append-only NDJSON journal backing the board's delta log.

One JSON object per line. Recovery rules, in order:

  * a trailing fragment with no terminating newline is a torn write from a
    crash; it is discarded and the file is truncated back to the last good
    record before any new append
  * a newline-terminated line that fails to parse is real corruption and is
    fatal; silently skipping mid-file damage could fork replica histories

Durability is flush-per-append by default; ``fsync=True`` additionally
forces the OS buffer to disk after every record.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import JournalCorruption


class Journal:
    def __init__(self, path: str | Path, fsync: bool = False):
        self.path = Path(path)
        self.fsync = fsync
        self._fh = None

    def recover(self) -> list[dict]:
        """Read every intact record, truncate any torn tail, open for append."""
        if self._fh is not None:
            raise RuntimeError("journal already open")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        data = self.path.read_bytes() if self.path.exists() else b""
        records: list[dict] = []
        good_end = 0
        start = 0
        line_no = 0
        while True:
            cut = data.find(b"\n", start)
            if cut == -1:
                break
            line_no += 1
            line = data[start:cut]
            if line.strip():
                try:
                    record = json.loads(line)
                except ValueError:
                    raise JournalCorruption(
                        f"{self.path}: unreadable record on line {line_no}"
                    ) from None
                if not isinstance(record, dict):
                    raise JournalCorruption(
                        f"{self.path}: line {line_no} is not an object"
                    )
                records.append(record)
            start = cut + 1
            good_end = start
        if good_end != len(data):
            with open(self.path, "r+b") as fh:
                fh.truncate(good_end)
        self._fh = open(self.path, "ab")
        return records

    def append(self, record: dict) -> None:
        if self._fh is None:
            raise RuntimeError("journal is not open; call recover() first")
        line = json.dumps(record, sort_keys=True, separators=(",", ":"))
        self._fh.write(line.encode("utf-8") + b"\n")
        self._fh.flush()
        if self.fsync:
            os.fsync(self._fh.fileno())

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "Journal":
        if self._fh is None:
            self.recover()
        return self

    def __exit__(self, *exc) -> None:
        self.close()
