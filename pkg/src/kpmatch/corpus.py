"""Labeled (argument, key point) pair dataset: loading, validation, statistics.

The on-disk format is a UTF-8 CSV with a header row. One row per labeled
pair; argument and key point attributes are repeated on every row that
mentions them and must stay consistent across rows. Column names are
bound to roles through a column map so differently-headed releases of
the same format can be read without editing the file.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .text import count_sentences, count_tokens


class Stance(Enum):
    PRO = "Pro"
    CON = "Con"


# Accepted stance spellings; the public release encodes stance as 1 / -1.
STANCE_TOKENS = {
    "1": Stance.PRO,
    "pro": Stance.PRO,
    "Pro": Stance.PRO,
    "-1": Stance.CON,
    "con": Stance.CON,
    "Con": Stance.CON,
}

LABEL_TOKENS = {"1": True, "Match": True, "0": False, "NoMatch": False}


class ArgumentCategory(Enum):
    """How many key points an argument is matched to.

    AMBIGUOUS only occurs in raw-annotation space (see the annotation
    module); a finished pair dataset never contains ambiguous arguments.
    """

    NO_KEY_POINT = "no_key_point"
    AMBIGUOUS = "ambiguous"
    SINGLE = "single"
    MULTIPLE = "multiple"


class DatasetError(ValueError):
    """A dataset file or value violates the format or its invariants."""


ROLES = ("arg_id", "key_point_id", "argument", "key_point", "topic", "stance", "label")
OPTIONAL_ROLES = ("quality",)
DEFAULT_COLUMN_MAP: dict[str, str] = {role: role for role in ROLES + OPTIONAL_ROLES}


def parse_stance(token: str) -> Stance:
    try:
        return STANCE_TOKENS[token.strip()]
    except KeyError:
        raise DatasetError(f"unparseable stance {token!r}") from None


def parse_label(token: str) -> bool:
    try:
        return LABEL_TOKENS[token.strip()]
    except KeyError:
        raise DatasetError(f"unparseable label {token!r}") from None


@dataclass(frozen=True)
class Argument:
    id: str
    text: str
    topic: str
    stance: Stance
    quality: float | None = None


@dataclass(frozen=True)
class KeyPoint:
    id: str
    text: str
    topic: str
    stance: Stance


@dataclass(frozen=True)
class LabeledPair:
    argument_id: str
    key_point_id: str
    label: bool


class Dataset:
    """Immutable, validated collection of arguments, key points and pairs.

    The candidate set of an argument is the set of key points it is
    paired with; every pair's argument and key point share topic and
    stance.
    """

    def __init__(
        self,
        arguments: Iterable[Argument],
        key_points: Iterable[KeyPoint],
        pairs: Iterable[LabeledPair],
    ) -> None:
        self.arguments: dict[str, Argument] = {}
        for arg in arguments:
            if arg.id in self.arguments:
                raise DatasetError(f"duplicate argument id {arg.id!r}")
            if not arg.text.strip():
                raise DatasetError(f"argument {arg.id!r} has empty text")
            if arg.quality is not None and not 0.0 <= arg.quality <= 1.0:
                raise DatasetError(f"argument {arg.id!r} quality out of [0,1]")
            self.arguments[arg.id] = arg
        self.key_points: dict[str, KeyPoint] = {}
        for kp in key_points:
            if kp.id in self.key_points:
                raise DatasetError(f"duplicate key point id {kp.id!r}")
            if not kp.text.strip():
                raise DatasetError(f"key point {kp.id!r} has empty text")
            self.key_points[kp.id] = kp

        self.pairs: tuple[LabeledPair, ...] = tuple(pairs)
        seen: set[tuple[str, str]] = set()
        by_argument: dict[str, list[LabeledPair]] = {}
        for pair in self.pairs:
            key = (pair.argument_id, pair.key_point_id)
            if key in seen:
                raise DatasetError(f"duplicate pair {key}")
            seen.add(key)
            arg = self.arguments.get(pair.argument_id)
            kp = self.key_points.get(pair.key_point_id)
            if arg is None:
                raise DatasetError(f"pair {key} references unknown argument")
            if kp is None:
                raise DatasetError(f"pair {key} references unknown key point")
            if arg.topic != kp.topic:
                raise DatasetError(f"pair {key}: topic mismatch")
            if arg.stance != kp.stance:
                raise DatasetError(f"pair {key}: stance mismatch")
            by_argument.setdefault(pair.argument_id, []).append(pair)

        self._pairs_by_argument = {
            arg_id: tuple(ps) for arg_id, ps in by_argument.items()
        }
        self._gold_matches = {
            arg_id: frozenset(p.key_point_id for p in ps if p.label)
            for arg_id, ps in self._pairs_by_argument.items()
        }
        topics = {a.topic for a in self.arguments.values()}
        topics.update(kp.topic for kp in self.key_points.values())
        self.topics: tuple[str, ...] = tuple(sorted(topics))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.arguments == other.arguments
            and self.key_points == other.key_points
            and sorted(self.pairs, key=lambda p: (p.argument_id, p.key_point_id))
            == sorted(other.pairs, key=lambda p: (p.argument_id, p.key_point_id))
        )

    def pairs_of(self, argument_id: str) -> tuple[LabeledPair, ...]:
        return self._pairs_by_argument.get(argument_id, ())

    def candidates(self, argument_id: str) -> tuple[str, ...]:
        """Key point ids the argument is paired with, sorted."""
        return tuple(sorted(p.key_point_id for p in self.pairs_of(argument_id)))

    def gold_matches(self, argument_id: str) -> frozenset[str]:
        return self._gold_matches.get(argument_id, frozenset())

    def pairs_in(self, topics: Iterable[str]) -> Iterator[LabeledPair]:
        scope = set(topics)
        for pair in self.pairs:
            if self.arguments[pair.argument_id].topic in scope:
                yield pair

    def arguments_in(self, topics: Iterable[str]) -> list[Argument]:
        scope = set(topics)
        return [a for a in self.arguments.values() if a.topic in scope]


def _resolve_columns(
    header: Sequence[str], column_map: Mapping[str, str]
) -> dict[str, int]:
    index = {name: i for i, name in enumerate(header)}
    resolved: dict[str, int] = {}
    for role in ROLES:
        name = column_map.get(role)
        if name is None:
            raise DatasetError(f"column map does not cover role {role!r}")
        if name not in index:
            raise DatasetError(f"missing column {name!r} for role {role!r}")
        resolved[role] = index[name]
    quality_name = column_map.get("quality")
    if quality_name is not None and quality_name in index:
        resolved["quality"] = index[quality_name]
    return resolved


def load_dataset(
    path: str | Path, column_map: Mapping[str, str] | None = None
) -> Dataset:
    """Load and validate a pair dataset from a CSV file.

    Raises DatasetError with the offending row number for missing
    columns, conflicting argument/key point definitions (including
    stance mismatches), duplicate pairs and unparseable stance or
    label values. Row order does not affect the result.
    """
    column_map = dict(column_map or DEFAULT_COLUMN_MAP)
    arguments: dict[str, Argument] = {}
    key_points: dict[str, KeyPoint] = {}
    pairs: list[LabeledPair] = []
    seen_pairs: set[tuple[str, str]] = set()

    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file, header row required") from None
        cols = _resolve_columns(header, column_map)

        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                stance = parse_stance(row[cols["stance"]])
                label = parse_label(row[cols["label"]])
            except DatasetError as exc:
                raise DatasetError(f"row {row_no}: {exc}") from None
            except IndexError:
                raise DatasetError(f"row {row_no}: too few fields") from None

            quality: float | None = None
            if "quality" in cols and row[cols["quality"]].strip():
                try:
                    quality = float(row[cols["quality"]])
                except ValueError:
                    raise DatasetError(f"row {row_no}: unparseable quality") from None

            topic = row[cols["topic"]]
            arg = Argument(
                id=row[cols["arg_id"]],
                text=row[cols["argument"]],
                topic=topic,
                stance=stance,
                quality=quality,
            )
            if not arg.text.strip():
                raise DatasetError(f"row {row_no}: argument {arg.id!r} has empty text")
            prior_arg = arguments.get(arg.id)
            if prior_arg is None:
                arguments[arg.id] = arg
            elif prior_arg != arg:
                if prior_arg.stance != arg.stance:
                    raise DatasetError(f"stance mismatch at row {row_no}")
                raise DatasetError(
                    f"row {row_no}: conflicting definition of argument {arg.id!r}"
                )

            kp = KeyPoint(
                id=row[cols["key_point_id"]],
                text=row[cols["key_point"]],
                topic=topic,
                stance=stance,
            )
            if not kp.text.strip():
                raise DatasetError(f"row {row_no}: key point {kp.id!r} has empty text")
            prior_kp = key_points.get(kp.id)
            if prior_kp is None:
                key_points[kp.id] = kp
            elif prior_kp != kp:
                if prior_kp.stance != kp.stance:
                    raise DatasetError(f"stance mismatch at row {row_no}")
                raise DatasetError(
                    f"row {row_no}: conflicting definition of key point {kp.id!r}"
                )

            pair_key = (arg.id, kp.id)
            if pair_key in seen_pairs:
                raise DatasetError(f"row {row_no}: duplicate pair {pair_key}")
            seen_pairs.add(pair_key)
            pairs.append(LabeledPair(arg.id, kp.id, label))

    return Dataset(arguments.values(), key_points.values(), pairs)


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset in the canonical CSV format (sorted rows).

    load_dataset(write_dataset(d)) reproduces d exactly; quality is
    included only when every argument carries it.
    """
    with_quality = all(a.quality is not None for a in dataset.arguments.values())
    header = list(ROLES) + (["quality"] if with_quality else [])
    rows = sorted(
        dataset.pairs,
        key=lambda p: (
            dataset.arguments[p.argument_id].topic,
            dataset.arguments[p.argument_id].stance.value,
            p.argument_id,
            p.key_point_id,
        ),
    )
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for pair in rows:
            arg = dataset.arguments[pair.argument_id]
            kp = dataset.key_points[pair.key_point_id]
            row = [
                arg.id,
                kp.id,
                arg.text,
                kp.text,
                arg.topic,
                arg.stance.value,
                "1" if pair.label else "0",
            ]
            if with_quality:
                row.append(repr(arg.quality))
            writer.writerow(row)


@dataclass(frozen=True)
class DatasetStats:
    pair_count: int
    positive_count: int
    positive_rate: float | None
    argument_count: int
    key_point_count: int
    key_points_per_topic: float | None


def dataset_stats(dataset: Dataset) -> DatasetStats:
    """Exact dataset-level counts; rates are None when undefined."""
    pair_count = len(dataset.pairs)
    positive_count = sum(1 for p in dataset.pairs if p.label)
    topic_count = len(dataset.topics)
    return DatasetStats(
        pair_count=pair_count,
        positive_count=positive_count,
        positive_rate=positive_count / pair_count if pair_count else None,
        argument_count=len(dataset.arguments),
        key_point_count=len(dataset.key_points),
        key_points_per_topic=(
            len(dataset.key_points) / topic_count if topic_count else None
        ),
    )


def category_of(dataset: Dataset, argument_id: str) -> ArgumentCategory:
    """Category by gold match count: 0 -> none, 1 -> single, >=2 -> multiple."""
    if argument_id not in dataset.arguments:
        raise DatasetError(f"unknown argument id {argument_id!r}")
    matches = len(dataset.gold_matches(argument_id))
    if matches == 0:
        return ArgumentCategory.NO_KEY_POINT
    if matches == 1:
        return ArgumentCategory.SINGLE
    return ArgumentCategory.MULTIPLE


@dataclass(frozen=True)
class CategoryTextStats:
    fraction: float
    mean_quality: float | None
    mean_tokens: float
    mean_sentences: float


def category_text_stats(dataset: Dataset) -> dict[ArgumentCategory, CategoryTextStats]:
    """Per-category argument statistics (fractions, quality, length).

    The quality column is reported only when every argument carries a
    quality value.
    """
    total = len(dataset.arguments)
    with_quality = total > 0 and all(
        a.quality is not None for a in dataset.arguments.values()
    )
    grouped: dict[ArgumentCategory, list[Argument]] = {}
    for arg in dataset.arguments.values():
        grouped.setdefault(category_of(dataset, arg.id), []).append(arg)

    stats: dict[ArgumentCategory, CategoryTextStats] = {}
    for category, args in grouped.items():
        n = len(args)
        stats[category] = CategoryTextStats(
            fraction=n / total,
            mean_quality=(
                sum(a.quality for a in args) / n if with_quality else None  # type: ignore[misc]
            ),
            mean_tokens=sum(count_tokens(a.text) for a in args) / n,
            mean_sentences=sum(count_sentences(a.text) for a in args) / n,
        )
    return stats
