"""Tabular output helpers shared by the CLI and the experiment harness."""
from __future__ import annotations

import csv
import json
from pathlib import Path

FORMATS = ("csv", "json")


def _cell(v):
    # repr round-trips floats exactly, keeping files byte-stable across runs
    return repr(v) if isinstance(v, float) else v


def write_rows(path, rows: list[dict], fmt: str = "csv", columns=None) -> Path:
    """Write a list of flat records as CSV or JSON; return the actual path.

    The suffix of ``path`` is replaced to match ``fmt``.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path).with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = list(rows[0]) if rows else []
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_cell(row[c]) for c in columns])
    else:
        with path.open("w") as fh:
            json.dump([{c: row[c] for c in columns} for row in rows], fh, indent=1)
            fh.write("\n")
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
