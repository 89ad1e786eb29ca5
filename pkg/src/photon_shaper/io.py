"""Atomic file output helpers."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path, header: list[str], columns) -> None:
    """Write equal-length numeric columns with shortest round-trip formatting."""
    rows = ["# " + ",".join(header)]
    for vals in zip(*columns):
        rows.append(",".join(repr(float(v)) for v in vals))
    atomic_write_text(path, "\n".join(rows) + "\n")
