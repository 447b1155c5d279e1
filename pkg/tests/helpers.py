"""Small construction helpers shared across test modules."""

from __future__ import annotations

import csv
from pathlib import Path

from kpmatch.corpus import Argument, Dataset, KeyPoint, LabeledPair, Stance


def make_dataset(rows: list[tuple[str, str, str, Stance, bool]]) -> Dataset:
    """Build a Dataset from (arg_id, kp_id, topic, stance, label) rows.

    Texts are synthesized from the ids.
    """
    arguments = {}
    key_points = {}
    pairs = []
    for arg_id, kp_id, topic, stance, label in rows:
        arguments.setdefault(
            arg_id, Argument(arg_id, f"text of {arg_id}", topic, stance)
        )
        key_points.setdefault(kp_id, KeyPoint(kp_id, f"text of {kp_id}", topic, stance))
        pairs.append(LabeledPair(arg_id, kp_id, label))
    return Dataset(arguments.values(), key_points.values(), pairs)


def write_csv(path: Path, header: list[str], rows: list[list[str]]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    return path


DATASET_HEADER = [
    "arg_id",
    "key_point_id",
    "argument",
    "key_point",
    "topic",
    "stance",
    "label",
]


def dataset_row(
    arg_id: str,
    kp_id: str,
    topic: str = "t1",
    stance: str = "1",
    label: str = "1",
    argument: str | None = None,
    key_point: str | None = None,
) -> list[str]:
    return [
        arg_id,
        kp_id,
        argument or f"text of {arg_id}",
        key_point or f"text of {kp_id}",
        topic,
        stance,
        label,
    ]
