"""Match scores for candidate pairs.

Two sources: a native tf-idf cosine scorer fitted on a declared topic
scope, and ingestion of externally produced score files (embedding or
classifier outputs). Either way the result is a ScoreTable covering
exactly the candidate pairs of a dataset.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import Dataset
from .text import tokenize


class ScoreFileError(ValueError):
    """A score file fails validation against its dataset."""


@dataclass(frozen=True)
class TfIdfModel:
    """Fitted tf-idf weights: idf(t) = ln((1 + N) / (1 + df(t))) + 1."""

    vocabulary: dict[str, int]
    idf: dict[str, float]
    fitted_on: int


def fit_tfidf(documents: Iterable[str]) -> TfIdfModel:
    """Fit idf weights on a document collection.

    Raises ValueError when no document yields any token.
    """
    doc_count = 0
    df: Counter[str] = Counter()
    for doc in documents:
        doc_count += 1
        df.update(set(tokenize(doc)))
    if not df:
        raise ValueError("no tokens in any document")
    vocabulary = {term: i for i, term in enumerate(sorted(df))}
    idf = {
        term: math.log((1 + doc_count) / (1 + df[term])) + 1.0
        for term in vocabulary
    }
    return TfIdfModel(vocabulary=vocabulary, idf=idf, fitted_on=doc_count)


def _weights(model: TfIdfModel, text: str) -> dict[str, float]:
    counts = Counter(tokenize(text))
    return {
        term: tf * model.idf[term]
        for term, tf in counts.items()
        if term in model.idf
    }


def tfidf_score(model: TfIdfModel, text_a: str, text_b: str) -> float:
    """Cosine similarity of tf-idf weighted vectors (raw term counts).

    Out-of-vocabulary tokens contribute nothing; an all-zero vector
    scores 0.
    """
    return _cosine(_weights(model, text_a), _weights(model, text_b))


@dataclass(frozen=True)
class ScoreTable:
    """Map from (argument id, key point id) to a finite match score."""

    entries: dict[tuple[str, str], float]
    provenance: str

    def get(self, argument_id: str, key_point_id: str) -> float:
        return self.entries[(argument_id, key_point_id)]

    def validate_coverage(self, dataset: Dataset) -> None:
        """Require exactly one entry per dataset pair: no holes, no extras."""
        expected = {(p.argument_id, p.key_point_id) for p in dataset.pairs}
        have = self.entries.keys()
        missing = expected - have
        if missing:
            raise ScoreFileError(f"missing score for pair {sorted(missing)[0]}")
        extra = have - expected
        if extra:
            raise ScoreFileError(f"score for unknown pair {sorted(extra)[0]}")


def score_dataset_tfidf(
    dataset: Dataset,
    fit_topics: Iterable[str],
    score_topics: Iterable[str] | None = None,
) -> ScoreTable:
    """Score dataset pairs with a tf-idf model fitted on fit_topics.

    The model is fitted on every argument and key point text of the fit
    scope; scores cover the pairs whose topic is in score_topics (all
    topics when omitted). Deterministic: identical inputs give
    bit-identical tables.
    """
    fit_scope = set(fit_topics)
    if not fit_scope:
        raise ValueError("empty fit scope")
    unknown = fit_scope - set(dataset.topics)
    if unknown:
        raise ValueError(f"fit scope topic not in dataset: {sorted(unknown)[0]!r}")
    documents = [
        a.text
        for a in sorted(dataset.arguments.values(), key=lambda a: a.id)
        if a.topic in fit_scope
    ] + [
        k.text
        for k in sorted(dataset.key_points.values(), key=lambda k: k.id)
        if k.topic in fit_scope
    ]
    model = fit_tfidf(documents)

    scope = set(score_topics) if score_topics is not None else set(dataset.topics)
    entries: dict[tuple[str, str], float] = {}
    weight_cache: dict[str, dict[str, float]] = {}
    for pair in dataset.pairs_in(scope):
        arg = dataset.arguments[pair.argument_id]
        kp = dataset.key_points[pair.key_point_id]
        for entity_id, txt in ((arg.id, arg.text), (kp.id, kp.text)):
            if entity_id not in weight_cache:
                weight_cache[entity_id] = _weights(model, txt)
        entries[(arg.id, kp.id)] = _cosine(
            weight_cache[arg.id], weight_cache[kp.id]
        )
    return ScoreTable(entries=entries, provenance="tfidf")


def _cosine(wa: dict[str, float], wb: dict[str, float]) -> float:
    if wa == wb:
        return 1.0 if wa else 0.0
    if not wa or not wb:
        return 0.0
    shorter, longer = (wa, wb) if len(wa) <= len(wb) else (wb, wa)
    dot = sum(w * longer[t] for t, w in shorter.items() if t in longer)
    if dot == 0.0:
        return 0.0
    norm_a = math.sqrt(sum(w * w for w in wa.values()))
    norm_b = math.sqrt(sum(w * w for w in wb.values()))
    return min(1.0, dot / (norm_a * norm_b))


SCORE_FILE_HEADER = ("arg_id", "key_point_id", "score")


def load_scores(path: str | Path, dataset: Dataset) -> ScoreTable:
    """Load an external score file and validate it against a dataset.

    The file must cover exactly the dataset's pairs with finite scores
    and no duplicates; violations are reported with their row number.
    Scores are not restricted to [0, 1].
    """
    entries: dict[tuple[str, str], float] = {}
    expected = {(p.argument_id, p.key_point_id) for p in dataset.pairs}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ScoreFileError(f"{path}: empty file") from None
        if tuple(header) != SCORE_FILE_HEADER:
            raise ScoreFileError(
                f"{path}: expected header {','.join(SCORE_FILE_HEADER)}"
            )
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ScoreFileError(f"row {row_no}: expected 3 fields")
            key = (row[0], row[1])
            try:
                score = float(row[2])
            except ValueError:
                raise ScoreFileError(
                    f"row {row_no}: non-numeric score {row[2]!r}"
                ) from None
            if not math.isfinite(score):
                raise ScoreFileError(f"row {row_no}: non-finite score {row[2]!r}")
            if key in entries:
                raise ScoreFileError(f"row {row_no}: duplicate pair {key}")
            if key not in expected:
                raise ScoreFileError(f"row {row_no}: unknown pair {key}")
            entries[key] = score
    missing = expected - entries.keys()
    if missing:
        raise ScoreFileError(f"missing score for pair {sorted(missing)[0]}")
    return ScoreTable(entries=entries, provenance=f"external:{Path(path).name}")


def write_scores(table: Mapping[tuple[str, str], float] | ScoreTable, path: str | Path) -> None:
    """Write scores in the score-file format, sorted by pair key."""
    entries = table.entries if isinstance(table, ScoreTable) else table
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SCORE_FILE_HEADER)
        for (arg_id, kp_id), score in sorted(entries.items()):
            writer.writerow([arg_id, kp_id, repr(score)])
