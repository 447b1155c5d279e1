"""Gold-label construction from raw multi-annotator judgments.

Pipeline: annotator-level quality filters (stance test questions,
annotator agreement), judgment-level cleansing, majority consolidation,
label-score computation and final pair generation with key-point
pruning. Agreement statistics (Cohen's and Fleiss' kappa) live here
as well.
"""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import (
    Argument,
    ArgumentCategory,
    Dataset,
    KeyPoint,
    LabeledPair,
    Stance,
    parse_stance,
)

NONE_TOKEN = "NONE"


@dataclass(frozen=True)
class RawJudgment:
    """One annotator's response for one argument.

    Before cleansing, selecting the None option together with key
    points is representable (and flagged illegal); cleansing drops
    such judgments.
    """

    annotator_id: str
    argument_id: str
    selected_key_point_ids: frozenset[str]
    selected_none: bool
    stance_answer: Stance

    @property
    def is_legal(self) -> bool:
        return not (self.selected_none and self.selected_key_point_ids)

    @property
    def effective_none(self) -> bool:
        """True when the judgment maps the argument to no key point."""
        return self.selected_none or not self.selected_key_point_ids


@dataclass(frozen=True)
class LabelScore:
    """Fraction of valid judgments marking the pair as matching."""

    argument_id: str
    key_point_id: str
    score: float


@dataclass(frozen=True)
class ConsolidatedArgument:
    argument_id: str
    matched_key_point_ids: frozenset[str]
    category: ArgumentCategory


@dataclass(frozen=True)
class AnnotatorReport:
    annotator_id: str
    judgment_count: int
    stance_error_rate: float
    kappa: float | None
    removed: bool
    reasons: tuple[str, ...]


def cohen_kappa(
    labels_a: Sequence[int], labels_b: Sequence[int]
) -> float | None:
    """Cohen's kappa for two binary label sequences.

    Returns None (undefined) when chance agreement is 1, i.e. both
    sequences are the same constant.
    """
    if len(labels_a) != len(labels_b):
        raise ValueError("label sequences differ in length")
    n = len(labels_a)
    if n == 0:
        raise ValueError("empty label sequences")
    agree = sum(1 for a, b in zip(labels_a, labels_b) if bool(a) == bool(b))
    ones_a = sum(1 for a in labels_a if a)
    ones_b = sum(1 for b in labels_b if b)
    # kappa = (p_o - p_e) / (1 - p_e), kept exact in integers:
    # numerator n*agree - E, denominator n*n - E with E = marginal products.
    expected = ones_a * ones_b + (n - ones_a) * (n - ones_b)
    denominator = n * n - expected
    if denominator == 0:
        return None
    return (n * agree - expected) / denominator


def fleiss_kappa(table: Sequence[Sequence[int]]) -> float | None:
    """Fleiss' kappa over an item x category count matrix.

    Items may have different rater counts; every item needs at least
    two ratings. Returns None when chance agreement is 1 (all ratings
    in one category).
    """
    if not table:
        raise ValueError("empty rating table")
    category_totals: Counter[int] = Counter()
    total_ratings = 0
    agreements: list[float] = []
    for i, row in enumerate(table):
        n_i = sum(row)
        if n_i < 2:
            raise ValueError(f"item {i} has fewer than 2 ratings")
        agreements.append(
            (sum(c * c for c in row) - n_i) / (n_i * (n_i - 1))
        )
        for j, c in enumerate(row):
            if c < 0:
                raise ValueError("negative rating count")
            category_totals[j] += c
        total_ratings += n_i
    p_observed = sum(agreements) / len(agreements)
    p_expected = sum(
        (c / total_ratings) ** 2 for c in category_totals.values()
    )
    if p_expected == 1.0:
        return None
    return (p_observed - p_expected) / (1.0 - p_expected)


def binary_decisions(
    judgments: Iterable[RawJudgment],
    candidates: Mapping[str, Sequence[str]],
) -> dict[str, dict[tuple[str, str], int]]:
    """Expand judgments to per-annotator binary (argument, key point) decisions.

    Every candidate key point of a judged argument yields one decision;
    a None selection expands to all zeros.
    """
    decisions: dict[str, dict[tuple[str, str], int]] = defaultdict(dict)
    for judgment in judgments:
        kps = candidates.get(judgment.argument_id)
        if kps is None:
            raise ValueError(
                f"no candidate key points for argument {judgment.argument_id!r}"
            )
        row = decisions[judgment.annotator_id]
        for kp in kps:
            row[(judgment.argument_id, kp)] = int(
                kp in judgment.selected_key_point_ids
            )
    return dict(decisions)


def annotator_kappa(
    judgments: Iterable[RawJudgment],
    candidates: Mapping[str, Sequence[str]],
    min_shared: int = 50,
    min_partners: int = 5,
) -> dict[str, float | None]:
    """Mean pairwise Cohen's kappa per annotator.

    A partner qualifies when it shares at least min_shared binary
    decisions; the score is the mean of the defined pairwise kappas
    against qualifying partners, and undefined (None) with fewer than
    min_partners qualifying partners.
    """
    decisions = binary_decisions(judgments, candidates)
    annotators = sorted(decisions)
    pairwise: dict[str, list[float]] = {a: [] for a in annotators}
    qualifying: Counter[str] = Counter()
    for i, a in enumerate(annotators):
        keys_a = decisions[a].keys()
        for b in annotators[i + 1 :]:
            shared = sorted(keys_a & decisions[b].keys())
            if len(shared) < min_shared:
                continue
            qualifying[a] += 1
            qualifying[b] += 1
            kappa = cohen_kappa(
                [decisions[a][k] for k in shared],
                [decisions[b][k] for k in shared],
            )
            if kappa is not None:
                pairwise[a].append(kappa)
                pairwise[b].append(kappa)
    scores: dict[str, float | None] = {}
    for a in annotators:
        if qualifying[a] < min_partners or not pairwise[a]:
            scores[a] = None
        else:
            scores[a] = sum(pairwise[a]) / len(pairwise[a])
    return scores


def filter_annotators(
    judgments: Sequence[RawJudgment],
    gold_stance: Mapping[str, Stance],
    candidates: Mapping[str, Sequence[str]],
    max_stance_error: float = 0.10,
    min_kappa: float = 0.3,
    min_shared: int = 50,
    min_partners: int = 5,
) -> tuple[list[RawJudgment], dict[str, AnnotatorReport]]:
    """Drop all judgments of low-quality annotators.

    An annotator is removed when their stance error rate exceeds
    max_stance_error, or their annotator kappa is defined and below
    min_kappa. Annotators with undefined kappa are retained. Both
    checks are evaluated on the full input set.
    """
    by_annotator: dict[str, list[RawJudgment]] = defaultdict(list)
    for judgment in judgments:
        if judgment.argument_id not in gold_stance:
            raise ValueError(
                f"no gold stance for argument {judgment.argument_id!r}"
            )
        by_annotator[judgment.annotator_id].append(judgment)

    kappas = annotator_kappa(judgments, candidates, min_shared, min_partners)
    reports: dict[str, AnnotatorReport] = {}
    retained: list[RawJudgment] = []
    for annotator_id in sorted(by_annotator):
        own = by_annotator[annotator_id]
        errors = sum(
            1 for j in own if j.stance_answer is not gold_stance[j.argument_id]
        )
        error_rate = errors / len(own)
        kappa = kappas.get(annotator_id)
        reasons: list[str] = []
        if error_rate > max_stance_error:
            reasons.append("stance_error_rate")
        if kappa is not None and kappa < min_kappa:
            reasons.append("low_kappa")
        removed = bool(reasons)
        reports[annotator_id] = AnnotatorReport(
            annotator_id=annotator_id,
            judgment_count=len(own),
            stance_error_rate=error_rate,
            kappa=kappa,
            removed=removed,
            reasons=tuple(reasons),
        )
        if not removed:
            retained.extend(own)
    return retained, reports


def cleanse(
    judgments: Iterable[RawJudgment], gold_stance: Mapping[str, Stance]
) -> list[RawJudgment]:
    """Drop individual judgments with a wrong stance answer or an
    illegal None-plus-key-point selection."""
    return [
        j
        for j in judgments
        if j.is_legal and j.stance_answer is gold_stance[j.argument_id]
    ]


def _group_valid(
    judgments: Iterable[RawJudgment], min_judgments: int
) -> dict[str, list[RawJudgment]]:
    grouped: dict[str, list[RawJudgment]] = defaultdict(list)
    for judgment in judgments:
        grouped[judgment.argument_id].append(judgment)
    return {
        arg_id: group
        for arg_id, group in grouped.items()
        if len(group) >= min_judgments
    }


def consolidate(
    judgments: Iterable[RawJudgment],
    candidates: Mapping[str, Sequence[str]],
    majority: float = 0.6,
    min_judgments: int = 7,
) -> list[ConsolidatedArgument]:
    """Consolidate valid judgments into per-argument gold matches.

    Arguments with fewer than min_judgments valid judgments are
    excluded entirely. A key point is matched when at least a
    `majority` fraction of the argument's valid judgments selected it
    (closed threshold); the argument has no key point when the None
    fraction reaches the same majority, and is ambiguous otherwise.
    Fractions use the post-filtering judgment count as denominator.
    """
    grouped = _group_valid(judgments, min_judgments)
    consolidated: list[ConsolidatedArgument] = []
    for arg_id in sorted(grouped):
        group = grouped[arg_id]
        n = len(group)
        matched = frozenset(
            kp
            for kp in candidates.get(arg_id, ())
            if sum(1 for j in group if kp in j.selected_key_point_ids) / n
            >= majority
        )
        if matched:
            category = (
                ArgumentCategory.SINGLE
                if len(matched) == 1
                else ArgumentCategory.MULTIPLE
            )
        elif sum(1 for j in group if j.effective_none) / n >= majority:
            category = ArgumentCategory.NO_KEY_POINT
        else:
            category = ArgumentCategory.AMBIGUOUS
        consolidated.append(ConsolidatedArgument(arg_id, matched, category))
    return consolidated


def label_scores(
    judgments: Iterable[RawJudgment],
    candidates: Mapping[str, Sequence[str]],
    min_judgments: int = 7,
) -> list[LabelScore]:
    """Label score for every candidate pair of every sufficiently-judged
    argument: fraction of its valid judgments selecting the key point."""
    grouped = _group_valid(judgments, min_judgments)
    scores: list[LabelScore] = []
    for arg_id in sorted(grouped):
        group = grouped[arg_id]
        n = len(group)
        for kp in candidates.get(arg_id, ()):
            selected = sum(1 for j in group if kp in j.selected_key_point_ids)
            scores.append(LabelScore(arg_id, kp, selected / n))
    return scores


def generate_pairs(
    scores: Iterable[LabelScore],
    positive_min: float = 0.6,
    negative_max: float = 0.15,
    min_matches_per_kp: int = 3,
) -> list[LabeledPair]:
    """Turn label scores into labeled pairs.

    Scores >= positive_min become matches, scores <= negative_max
    non-matches, anything in between is dropped. Key points left with
    fewer than min_matches_per_kp positive pairs are then removed
    together with all their pairs (a single pass; removing a key point
    cannot lower another key point's positive count).
    """
    labeled: list[LabeledPair] = []
    positives_per_kp: Counter[str] = Counter()
    for score in scores:
        if score.score >= positive_min:
            labeled.append(LabeledPair(score.argument_id, score.key_point_id, True))
            positives_per_kp[score.key_point_id] += 1
        elif score.score <= negative_max:
            labeled.append(LabeledPair(score.argument_id, score.key_point_id, False))
    pruned = {
        kp for kp in {p.key_point_id for p in labeled}
        if positives_per_kp[kp] < min_matches_per_kp
    }
    return [p for p in labeled if p.key_point_id not in pruned]


def read_judgments(path: str | Path) -> list[RawJudgment]:
    """Read raw judgments from CSV: annotator_id, argument_id, selected
    (pipe-separated key point ids or the literal NONE), stance_answer."""
    judgments: list[RawJudgment] = []
    seen: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        required = {"annotator_id", "argument_id", "selected", "stance_answer"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row_no, row in enumerate(reader, start=2):
            tokens = [t for t in row["selected"].split("|") if t]
            selected_none = NONE_TOKEN in tokens or not tokens
            kp_ids = frozenset(t for t in tokens if t != NONE_TOKEN)
            key = (row["annotator_id"], row["argument_id"])
            if key in seen:
                raise ValueError(f"row {row_no}: duplicate judgment {key}")
            seen.add(key)
            judgments.append(
                RawJudgment(
                    annotator_id=row["annotator_id"],
                    argument_id=row["argument_id"],
                    selected_key_point_ids=kp_ids,
                    selected_none=selected_none,
                    stance_answer=parse_stance(row["stance_answer"]),
                )
            )
    return judgments


def read_catalog(path: str | Path) -> tuple[list[Argument], list[KeyPoint]]:
    """Read the annotation task catalog: kind, id, text, topic, stance.

    The catalog supplies the gold stances plus the texts and topics
    needed to emit the final dataset.
    """
    arguments: list[Argument] = []
    key_points: list[KeyPoint] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        required = {"kind", "id", "text", "topic", "stance"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row_no, row in enumerate(reader, start=2):
            stance = parse_stance(row["stance"])
            if row["kind"] == "argument":
                arguments.append(
                    Argument(row["id"], row["text"], row["topic"], stance)
                )
            elif row["kind"] == "key_point":
                key_points.append(
                    KeyPoint(row["id"], row["text"], row["topic"], stance)
                )
            else:
                raise ValueError(f"row {row_no}: unknown kind {row['kind']!r}")
    return arguments, key_points


def candidate_map(
    arguments: Iterable[Argument], key_points: Iterable[KeyPoint]
) -> dict[str, list[str]]:
    """Candidates of each argument: all key points sharing topic and stance."""
    by_group: dict[tuple[str, Stance], list[str]] = defaultdict(list)
    for kp in key_points:
        by_group[(kp.topic, kp.stance)].append(kp.id)
    for ids in by_group.values():
        ids.sort()
    return {
        arg.id: by_group.get((arg.topic, arg.stance), [])
        for arg in arguments
    }


@dataclass
class BuildReport:
    """Statistics emitted alongside a generated dataset."""

    judgments_in: int
    judgments_after_filtering: int
    judgments_after_cleansing: int
    annotators_removed: int
    arguments_consolidated: int
    arguments_excluded: int
    category_fractions: dict[str, float]
    fleiss_kappa: float | None
    mean_annotator_kappa: float | None
    key_points_pruned: int
    pair_count: int
    positive_count: int
    contributing_annotators: tuple[str, ...] = ()
    annotator_reports: dict[str, AnnotatorReport] = field(repr=False, default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "judgments_in": self.judgments_in,
            "judgments_after_filtering": self.judgments_after_filtering,
            "judgments_after_cleansing": self.judgments_after_cleansing,
            "annotators_removed": self.annotators_removed,
            "arguments_consolidated": self.arguments_consolidated,
            "arguments_excluded": self.arguments_excluded,
            "category_fractions": self.category_fractions,
            "fleiss_kappa": self.fleiss_kappa,
            "mean_annotator_kappa": self.mean_annotator_kappa,
            "key_points_pruned": self.key_points_pruned,
            "pair_count": self.pair_count,
            "positive_count": self.positive_count,
            "contributing_annotators": list(self.contributing_annotators),
            "annotators": {
                a: {
                    "judgments": r.judgment_count,
                    "stance_error_rate": r.stance_error_rate,
                    "kappa": r.kappa,
                    "removed": r.removed,
                    "reasons": list(r.reasons),
                }
                for a, r in sorted(self.annotator_reports.items())
            },
        }


def build_gold_dataset(
    judgments: Sequence[RawJudgment],
    arguments: Sequence[Argument],
    key_points: Sequence[KeyPoint],
    majority: float = 0.6,
    min_judgments: int = 7,
    positive_min: float = 0.6,
    negative_max: float = 0.15,
    min_matches_per_kp: int = 3,
    max_stance_error: float = 0.10,
    min_kappa: float = 0.3,
    min_shared: int = 50,
    min_partners: int = 5,
) -> tuple[Dataset, BuildReport]:
    """Run the full annotation pipeline and assemble the final dataset.

    Annotator-level filtering runs first, judgment-level cleansing
    second; label scores and consolidation use the surviving judgments.
    """
    gold_stance = {a.id: a.stance for a in arguments}
    candidates = candidate_map(arguments, key_points)

    filtered, reports = filter_annotators(
        judgments,
        gold_stance,
        candidates,
        max_stance_error=max_stance_error,
        min_kappa=min_kappa,
        min_shared=min_shared,
        min_partners=min_partners,
    )
    valid = cleanse(filtered, gold_stance)
    consolidated = consolidate(valid, candidates, majority, min_judgments)
    scores = label_scores(valid, candidates, min_judgments)
    pairs = generate_pairs(scores, positive_min, negative_max, min_matches_per_kp)

    used_args = {p.argument_id for p in pairs}
    used_kps = {p.key_point_id for p in pairs}
    dataset = Dataset(
        [a for a in arguments if a.id in used_args],
        [k for k in key_points if k.id in used_kps],
        pairs,
    )

    judged_args = {j.argument_id for j in judgments}
    categories = Counter(c.category for c in consolidated)
    scored_kps = {s.key_point_id for s in scores}
    defined_kappas = [
        r.kappa for r in reports.values() if r.kappa is not None
    ]
    fleiss = _fleiss_over_decisions(valid, candidates)
    report = BuildReport(
        judgments_in=len(judgments),
        judgments_after_filtering=len(filtered),
        judgments_after_cleansing=len(valid),
        annotators_removed=sum(1 for r in reports.values() if r.removed),
        arguments_consolidated=len(consolidated),
        arguments_excluded=len(judged_args) - len(consolidated),
        category_fractions=(
            {
                cat.value: categories.get(cat, 0) / len(consolidated)
                for cat in ArgumentCategory
            }
            if consolidated
            else {}
        ),
        fleiss_kappa=fleiss,
        mean_annotator_kappa=(
            sum(defined_kappas) / len(defined_kappas) if defined_kappas else None
        ),
        key_points_pruned=len(scored_kps - used_kps),
        pair_count=len(pairs),
        positive_count=sum(1 for p in pairs if p.label),
        contributing_annotators=tuple(sorted({j.annotator_id for j in valid})),
        annotator_reports=reports,
    )
    return dataset, report


def _fleiss_over_decisions(
    judgments: Sequence[RawJudgment],
    candidates: Mapping[str, Sequence[str]],
) -> float | None:
    """Fleiss' kappa over binary pair decisions with >=2 ratings."""
    counts: dict[tuple[str, str], list[int]] = defaultdict(lambda: [0, 0])
    for judgment in judgments:
        for kp in candidates.get(judgment.argument_id, ()):
            selected = kp in judgment.selected_key_point_ids
            counts[(judgment.argument_id, kp)][1 if selected else 0] += 1
    table = [row for row in counts.values() if sum(row) >= 2]
    if not table:
        return None
    return fleiss_kappa(table)
