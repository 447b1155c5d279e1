"""Reading the matching toolkit's dataset CSV (the consumed interface)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

DEFAULT_COLUMNS = {
    "arg_id": "arg_id",
    "key_point_id": "key_point_id",
    "argument": "argument",
    "key_point": "key_point",
}


@dataclass(frozen=True)
class PairRecord:
    arg_id: str
    key_point_id: str
    argument: str
    key_point: str


def read_pairs(
    path: str | Path, columns: Mapping[str, str] | None = None
) -> list[PairRecord]:
    """One record per labeled pair; duplicates are rejected."""
    columns = {**DEFAULT_COLUMNS, **(columns or {})}
    records: list[PairRecord] = []
    seen: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = set(columns.values()) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row_no, row in enumerate(reader, start=2):
            key = (row[columns["arg_id"]], row[columns["key_point_id"]])
            if key in seen:
                raise ValueError(f"{path}: row {row_no}: duplicate pair {key}")
            seen.add(key)
            records.append(
                PairRecord(
                    arg_id=key[0],
                    key_point_id=key[1],
                    argument=row[columns["argument"]],
                    key_point=row[columns["key_point"]],
                )
            )
    if not records:
        raise ValueError(f"{path}: no pairs found")
    return records
