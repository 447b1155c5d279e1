"""Score export: one row per dataset pair, plus a run manifest."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

from . import __version__
from .dataset_io import read_pairs
from .embeddings import cosine, mean_vector, resolve_embedding


class ModelKind(Enum):
    AVERAGED_EMBEDDING = "averaged-embedding"
    PAIR_CLASSIFIER = "pair-classifier"


@dataclass(frozen=True)
class ProducerConfig:
    model_kind: ModelKind
    model: str
    output_path: str
    batch_size: int = 32

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


def export_scores(
    dataset_path: str | Path,
    config: ProducerConfig,
    columns: Mapping[str, str] | None = None,
) -> Path:
    """Compute scores for every pair and write the score file.

    All scores are computed first; any coverage problem (duplicate or
    unreadable pairs) aborts before anything is written.
    """
    pairs = read_pairs(dataset_path, columns)

    scores: dict[tuple[str, str], float] = {}
    manifest_extra: dict[str, object] = {}
    if config.model_kind is ModelKind.AVERAGED_EMBEDDING:
        backend = resolve_embedding(config.model)
        vector_cache: dict[str, object] = {}

        def vector_of(text: str):
            if text not in vector_cache:
                vector_cache[text] = mean_vector(backend, text)
            return vector_cache[text]

        for record in pairs:
            scores[(record.arg_id, record.key_point_id)] = cosine(
                vector_of(record.argument), vector_of(record.key_point)
            )
        manifest_extra["embedding_dim"] = backend.dim
    else:
        from .classifier import MAX_LENGTH, PairClassifier

        classifier = PairClassifier(config.model)
        for start in range(0, len(pairs), config.batch_size):
            batch = pairs[start : start + config.batch_size]
            values = classifier.score_batch(
                [(r.argument, r.key_point) for r in batch]
            )
            for record, value in zip(batch, values):
                scores[(record.arg_id, record.key_point_id)] = value
        manifest_extra["max_sequence_length"] = MAX_LENGTH
        manifest_extra["truncation"] = "longest_first"

    if len(scores) != len(pairs):
        raise ValueError(
            f"coverage mismatch: {len(scores)} scores for {len(pairs)} pairs"
        )

    output = Path(config.output_path)
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["arg_id", "key_point_id", "score"])
        for record in pairs:
            writer.writerow(
                [
                    record.arg_id,
                    record.key_point_id,
                    repr(scores[(record.arg_id, record.key_point_id)]),
                ]
            )

    manifest = {
        "tool": "score-producer",
        "tool_version": __version__,
        "dataset": str(dataset_path),
        "model_kind": config.model_kind.value,
        "model": config.model,
        "batch_size": config.batch_size,
        "pairs": len(pairs),
        **manifest_extra,
    }
    manifest_path = output.with_suffix(output.suffix + ".manifest.json")
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return output
