"""Cross-topic evaluation: folds, micro-averaged metrics, per-category
breakdowns, precision/recall trade-off curves and coverage curves.

Metrics are micro-averaged over the pairs of each fold's test topics,
then averaged across folds; folds where a metric is undefined are
excluded from that metric's mean.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .annotation import ConsolidatedArgument
from .corpus import Argument, ArgumentCategory, Dataset, KeyPoint, Stance
from .policies import (
    MethodKind,
    PolicyConfig,
    PolicyKind,
    Prediction,
    learn_bm_threshold,
    learn_dual_thresholds,
    learn_threshold,
    predict_all,
    tuning_split,
)
from .scoring import ScoreTable, load_scores, score_dataset_tfidf


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Fold:
    index: int
    test_topics: frozenset[str]
    train_topics: frozenset[str]
    dev_topics: frozenset[str]


def make_folds(
    topics: Sequence[str], seed: int, strict: bool = True
) -> list[Fold]:
    """Split topics into 4 folds: a seeded shuffle, consecutive blocks as
    test sets, the first 4 remaining topics as dev, the rest as train.

    Strict mode requires exactly 28 topics (7/17/4 per fold); otherwise
    any count divisible by 4 with at least 8 topics works.
    """
    if len(set(topics)) != len(topics):
        raise EvaluationError("duplicate topics")
    n = len(topics)
    if strict and n != 28:
        raise EvaluationError(f"expected 28 topics, got {n}")
    if n % 4 != 0 or n < 8:
        raise EvaluationError(f"topic count {n} not usable for 4 folds")
    order = list(topics)
    random.Random(seed).shuffle(order)
    block = n // 4
    folds = []
    for i in range(4):
        test = order[i * block : (i + 1) * block]
        rest = [t for t in order if t not in set(test)]
        folds.append(
            Fold(
                index=i,
                test_topics=frozenset(test),
                train_topics=frozenset(rest[4:]),
                dev_topics=frozenset(rest[:4]),
            )
        )
    return folds


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "Metrics":
        total = tp + fp + fn + tn
        precision = tp / (tp + fp) if tp + fp > 0 else None
        recall = tp / (tp + fn) if tp + fn > 0 else None
        if precision is None or recall is None:
            f1 = None
        elif precision + recall == 0:
            f1 = 0.0
        else:
            f1 = 2 * precision * recall / (precision + recall)
        return cls(
            tp=tp,
            fp=fp,
            fn=fn,
            tn=tn,
            accuracy=(tp + tn) / total if total else None,
            precision=precision,
            recall=recall,
            f1=f1,
        )


def _counts(
    predictions: Iterable[Prediction],
    dataset: Dataset,
    scope: Iterable[str],
) -> tuple[int, int, int, int]:
    matched = {p.argument_id: p.matched_key_point_ids for p in predictions}
    tp = fp = fn = tn = 0
    for pair in dataset.pairs_in(scope):
        if pair.argument_id not in matched:
            raise EvaluationError(
                f"no prediction for argument {pair.argument_id!r}"
            )
        predicted = pair.key_point_id in matched[pair.argument_id]
        if predicted and pair.label:
            tp += 1
        elif predicted:
            fp += 1
        elif pair.label:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def pair_metrics(
    predictions: Iterable[Prediction],
    dataset: Dataset,
    scope: Iterable[str],
) -> Metrics:
    """Micro-averaged pair-level metrics over the scope topics."""
    return Metrics.from_counts(*_counts(predictions, dataset, scope))


def category_metrics(
    predictions: Iterable[Prediction],
    dataset: Dataset,
    scope: Iterable[str],
) -> dict[ArgumentCategory, Metrics]:
    """Pair-level metrics split by the argument's gold match category."""
    matched = {p.argument_id: p.matched_key_point_ids for p in predictions}
    counts: dict[ArgumentCategory, list[int]] = defaultdict(lambda: [0, 0, 0, 0])
    for pair in dataset.pairs_in(scope):
        if pair.argument_id not in matched:
            raise EvaluationError(
                f"no prediction for argument {pair.argument_id!r}"
            )
        n_matches = len(dataset.gold_matches(pair.argument_id))
        category = (
            ArgumentCategory.NO_KEY_POINT
            if n_matches == 0
            else ArgumentCategory.SINGLE
            if n_matches == 1
            else ArgumentCategory.MULTIPLE
        )
        predicted = pair.key_point_id in matched[pair.argument_id]
        slot = counts[category]
        if predicted and pair.label:
            slot[0] += 1
        elif predicted:
            slot[1] += 1
        elif pair.label:
            slot[2] += 1
        else:
            slot[3] += 1
    return {
        category: Metrics.from_counts(*slot) for category, slot in counts.items()
    }


@dataclass(frozen=True)
class CurvePoint:
    threshold: float | None
    precision: float | None
    recall: float | None
    f1: float | None


@dataclass(frozen=True)
class Curve:
    name: str
    points: tuple[CurvePoint, ...]
    best: CurvePoint
    chosen: CurvePoint | None = None


def _point(
    config: PolicyConfig,
    threshold: float | None,
    scores: ScoreTable,
    dataset: Dataset,
    scope: set[str],
) -> CurvePoint:
    predictions = predict_all(config, scores, dataset, scope)
    metrics = pair_metrics(predictions, dataset, scope)
    return CurvePoint(threshold, metrics.precision, metrics.recall, metrics.f1)


def pr_curve(
    policy_kind: PolicyKind,
    scores: ScoreTable,
    dataset: Dataset,
    scope: Iterable[str],
    grid: Sequence[float],
    theta_high: float | None = None,
    chosen: PolicyConfig | None = None,
) -> Curve:
    """Precision/recall trade-off over a threshold grid.

    Best-match has no threshold and yields a single point. For the
    dual-threshold policy the grid sweeps theta_low with theta_high
    held fixed; grid values above theta_high are skipped. The curve
    carries the maximum-F1 point and, when a chosen config is given,
    the point at the tuned threshold.
    """
    scope = set(scope)
    points: list[CurvePoint] = []
    if policy_kind is PolicyKind.BEST_MATCH:
        points.append(
            _point(PolicyConfig(PolicyKind.BEST_MATCH), None, scores, dataset, scope)
        )
    else:
        if not grid:
            raise EvaluationError("empty threshold grid")
        for theta in sorted(set(grid), reverse=True):
            if policy_kind is PolicyKind.THRESHOLD:
                config = PolicyConfig(PolicyKind.THRESHOLD, theta=theta)
            elif policy_kind is PolicyKind.BM_THRESHOLD:
                config = PolicyConfig(PolicyKind.BM_THRESHOLD, theta=theta)
            elif policy_kind is PolicyKind.DUAL_THRESHOLD:
                if theta_high is None:
                    raise EvaluationError("dual-threshold curve needs theta_high")
                if theta > theta_high:
                    continue
                config = PolicyConfig(
                    PolicyKind.DUAL_THRESHOLD,
                    theta_low=theta,
                    theta_high=theta_high,
                )
            else:  # pragma: no cover
                raise EvaluationError(f"unknown policy kind {policy_kind!r}")
            points.append(_point(config, theta, scores, dataset, scope))

    best = max(
        (p for p in points if p.f1 is not None),
        key=lambda p: (p.f1, p.threshold if p.threshold is not None else math.inf),
        default=points[0],
    )
    chosen_point = None
    if chosen is not None:
        threshold = (
            chosen.theta_low
            if chosen.kind is PolicyKind.DUAL_THRESHOLD
            else chosen.theta
        )
        chosen_point = _point(chosen, threshold, scores, dataset, scope)
    return Curve(
        name=policy_kind.value,
        points=tuple(points),
        best=best,
        chosen=chosen_point,
    )


def coverage_curve(
    source: Dataset | Iterable[ConsolidatedArgument],
    arguments: Mapping[str, Argument] | None = None,
    key_points: Mapping[str, KeyPoint] | None = None,
) -> list[tuple[int, float]]:
    """Mean argument coverage when adding key points by salience.

    Per (topic, stance) group, key points are ordered by matched
    argument count (ties by id) and added incrementally; coverage(k) is
    the fraction of the group's arguments matched by the union of the
    top k. Groups shorter than the longest one carry their final value.
    Groups without arguments are skipped.
    """
    groups: dict[tuple[str, Stance], tuple[set[str], dict[str, set[str]]]] = {}

    def group_of(topic: str, stance: Stance) -> tuple[set[str], dict[str, set[str]]]:
        return groups.setdefault((topic, stance), (set(), {}))

    if isinstance(source, Dataset):
        for arg in source.arguments.values():
            group_of(arg.topic, arg.stance)[0].add(arg.id)
        for kp in source.key_points.values():
            group_of(kp.topic, kp.stance)[1].setdefault(kp.id, set())
        for pair in source.pairs:
            if pair.label:
                arg = source.arguments[pair.argument_id]
                group_of(arg.topic, arg.stance)[1][pair.key_point_id].add(arg.id)
    else:
        if arguments is None or key_points is None:
            raise EvaluationError(
                "consolidated input needs argument and key point catalogs"
            )
        for kp in key_points.values():
            group_of(kp.topic, kp.stance)[1].setdefault(kp.id, set())
        for item in source:
            arg = arguments[item.argument_id]
            members, matches = group_of(arg.topic, arg.stance)
            members.add(arg.id)
            for kp_id in item.matched_key_point_ids:
                matches.setdefault(kp_id, set()).add(arg.id)

    per_group: list[list[float]] = []
    for members, matches in groups.values():
        if not members:
            continue
        ordered = sorted(matches.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        covered: set[str] = set()
        fractions: list[float] = []
        for _, arg_ids in ordered:
            covered |= arg_ids
            fractions.append(len(covered) / len(members))
        per_group.append(fractions or [0.0])

    if not per_group:
        return []
    depth = max(len(f) for f in per_group)
    curve = []
    for k in range(depth):
        values = [f[k] if k < len(f) else f[-1] for f in per_group]
        curve.append((k + 1, sum(values) / len(values)))
    return curve


@dataclass(frozen=True)
class ScorerSpec:
    """What produces match scores: the native tf-idf scorer, an external
    score file, or one of the reference baselines."""

    kind: str  # tfidf | external | majority | random
    path: str | None = None
    p: float | None = None

    @classmethod
    def parse(cls, token: str) -> "ScorerSpec":
        if token == "tfidf":
            return cls("tfidf")
        if token == "majority":
            return cls("majority")
        if token == "random":
            return cls("random")
        if token.startswith("random="):
            return cls("random", p=float(token.split("=", 1)[1]))
        if token.startswith("external="):
            return cls("external", path=token.split("=", 1)[1])
        raise EvaluationError(f"unknown scorer {token!r}")

    def label(self) -> str:
        if self.kind == "external":
            return f"external={self.path}"
        if self.kind == "random" and self.p is not None:
            return f"random={self.p!r}"
        return self.kind


@dataclass(frozen=True)
class AveragedMetrics:
    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None


def _average(values: Iterable[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


def average_metrics(folds: Sequence[Metrics]) -> AveragedMetrics:
    return AveragedMetrics(
        accuracy=_average(m.accuracy for m in folds),
        precision=_average(m.precision for m in folds),
        recall=_average(m.recall for m in folds),
        f1=_average(m.f1 for m in folds),
    )


@dataclass(frozen=True)
class FoldResult:
    fold: Fold
    metrics: Metrics
    per_category: dict[ArgumentCategory, Metrics]
    config: PolicyConfig | None
    extras: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class EvalReport:
    scorer: ScorerSpec
    policy_kind: PolicyKind | None
    seed: int
    tuning: MethodKind | None
    per_fold: tuple[FoldResult, ...]
    averaged: AveragedMetrics
    per_category: dict[ArgumentCategory, AveragedMetrics]
    curves: tuple[Curve, ...]

    def to_json_dict(self) -> dict:
        def metrics_dict(m: Metrics) -> dict:
            return {
                "tp": m.tp,
                "fp": m.fp,
                "fn": m.fn,
                "tn": m.tn,
                "accuracy": m.accuracy,
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
            }

        return {
            "scorer": self.scorer.label(),
            "policy": self.policy_kind.value if self.policy_kind else None,
            "seed": self.seed,
            "tuning": self.tuning.value if self.tuning else None,
            "averaged": {
                "accuracy": self.averaged.accuracy,
                "precision": self.averaged.precision,
                "recall": self.averaged.recall,
                "f1": self.averaged.f1,
            },
            "per_category": {
                category.value: {
                    "accuracy": avg.accuracy,
                    "precision": avg.precision,
                    "recall": avg.recall,
                    "f1": avg.f1,
                }
                for category, avg in sorted(
                    self.per_category.items(), key=lambda kv: kv[0].value
                )
            },
            "folds": [
                {
                    "index": r.fold.index,
                    "test_topics": sorted(r.fold.test_topics),
                    "metrics": metrics_dict(r.metrics),
                    "per_category": {
                        c.value: metrics_dict(m)
                        for c, m in sorted(
                            r.per_category.items(), key=lambda kv: kv[0].value
                        )
                    },
                    "config": _config_dict(r.config),
                    "extras": dict(sorted(r.extras.items())),
                }
                for r in self.per_fold
            ],
        }


def _config_dict(config: PolicyConfig | None) -> dict | None:
    if config is None:
        return None
    return {
        "kind": config.kind.value,
        "theta": config.theta,
        "theta_low": config.theta_low,
        "theta_high": config.theta_high,
    }


def learn_policy_config(
    policy_kind: PolicyKind,
    scores: ScoreTable,
    dataset: Dataset,
    tuning_topics: Iterable[str],
) -> PolicyConfig:
    """Learn a policy's thresholds on the tuning topics' pairs."""
    scope = set(tuning_topics)
    if policy_kind is PolicyKind.BEST_MATCH:
        return PolicyConfig(PolicyKind.BEST_MATCH)
    if policy_kind is PolicyKind.THRESHOLD:
        pairs = [
            (scores.get(p.argument_id, p.key_point_id), p.label)
            for p in dataset.pairs_in(scope)
        ]
        return PolicyConfig(PolicyKind.THRESHOLD, theta=learn_threshold(pairs))
    groups = [
        [
            (p.key_point_id, scores.get(arg.id, p.key_point_id), p.label)
            for p in dataset.pairs_of(arg.id)
        ]
        for arg in sorted(dataset.arguments_in(scope), key=lambda a: a.id)
    ]
    if policy_kind is PolicyKind.BM_THRESHOLD:
        return PolicyConfig(
            PolicyKind.BM_THRESHOLD, theta=learn_bm_threshold(groups)
        )
    theta_low, theta_high = learn_dual_thresholds(groups)
    return PolicyConfig(
        PolicyKind.DUAL_THRESHOLD, theta_low=theta_low, theta_high=theta_high
    )


def _positive_rate(dataset: Dataset, topics: Iterable[str]) -> float:
    pairs = list(dataset.pairs_in(topics))
    if not pairs:
        raise EvaluationError("no pairs in scope for positive rate")
    return sum(1 for p in pairs if p.label) / len(pairs)


def _random_predictions(
    dataset: Dataset, topics: set[str], p: float, rng: random.Random
) -> list[Prediction]:
    matched: dict[str, set[str]] = {
        arg.id: set() for arg in dataset.arguments_in(topics)
    }
    ordered = sorted(
        dataset.pairs_in(topics), key=lambda pr: (pr.argument_id, pr.key_point_id)
    )
    for pair in ordered:
        if rng.random() < p:
            matched[pair.argument_id].add(pair.key_point_id)
    return [Prediction(arg_id, frozenset(kps)) for arg_id, kps in matched.items()]


def default_tuning(scorer: ScorerSpec) -> MethodKind | None:
    """Tf-idf scores need no labels, so tf-idf tunes on train plus dev;
    external score files are treated as supervised (dev only)."""
    if scorer.kind == "tfidf":
        return MethodKind.UNSUPERVISED
    if scorer.kind == "external":
        return MethodKind.SUPERVISED
    return None


def run_experiment(
    dataset: Dataset,
    scorer: ScorerSpec,
    policy_kind: PolicyKind | None,
    seed: int,
    tuning: MethodKind | None = None,
    with_curves: bool = False,
) -> EvalReport:
    """Cross-validated evaluation of a scorer/policy combination.

    Baseline scorers predict directly: the majority baseline matches
    nothing, the random baseline matches each pair independently with
    the training split's positive rate (or an explicit p). Reproducible:
    identical inputs and seed give an identical report.
    """
    folds = make_folds(dataset.topics, seed, strict=False)
    if tuning is None:
        tuning = default_tuning(scorer)
    external_table: ScoreTable | None = None
    if scorer.kind == "external":
        if scorer.path is None:
            raise EvaluationError("external scorer needs a path")
        external_table = load_scores(scorer.path, dataset)
        external_table.validate_coverage(dataset)

    results: list[FoldResult] = []
    curves: list[Curve] = []
    for fold in folds:
        test = set(fold.test_topics)
        extras: dict[str, float] = {}
        config: PolicyConfig | None = None
        table: ScoreTable | None = None

        if scorer.kind == "majority":
            predictions = [
                Prediction(arg.id, frozenset())
                for arg in dataset.arguments_in(test)
            ]
        elif scorer.kind == "random":
            p = scorer.p
            if p is None:
                p = _positive_rate(dataset, fold.train_topics)
            rng = random.Random(seed * 1_000_003 + fold.index)
            predictions = _random_predictions(dataset, test, p, rng)
            test_rate = _positive_rate(dataset, test)
            extras = {
                "p": p,
                "expected_precision": test_rate,
                "expected_recall": p,
                "expected_accuracy": test_rate * p + (1 - test_rate) * (1 - p),
                "expected_f1": (
                    2 * test_rate * p / (test_rate + p) if test_rate + p else 0.0
                ),
            }
        else:
            if policy_kind is None:
                raise EvaluationError("scorer requires a selection policy")
            if scorer.kind == "tfidf":
                if tuning is None:
                    tuning = MethodKind.UNSUPERVISED
                fit_scope = set(fold.train_topics) | set(fold.dev_topics)
                score_scope = fit_scope | test
                table = score_dataset_tfidf(dataset, fit_scope, score_scope)
            else:
                assert external_table is not None
                table = external_table
            tuning_topics = tuning_split(fold, tuning)
            config = learn_policy_config(policy_kind, table, dataset, tuning_topics)
            predictions = predict_all(config, table, dataset, test)

        metrics = pair_metrics(predictions, dataset, test)
        per_category = category_metrics(predictions, dataset, test)
        results.append(
            FoldResult(
                fold=fold,
                metrics=metrics,
                per_category=per_category,
                config=config,
                extras=extras,
            )
        )
        if with_curves and table is not None and policy_kind is not None:
            grid = default_grid(table, dataset, test, max_points=256)
            curve = pr_curve(
                policy_kind,
                table,
                dataset,
                test,
                grid,
                theta_high=(
                    config.theta_high
                    if config and config.kind is PolicyKind.DUAL_THRESHOLD
                    else None
                ),
                chosen=config,
            )
            curves.append(
                Curve(
                    name=f"fold{fold.index}-{policy_kind.value}",
                    points=curve.points,
                    best=curve.best,
                    chosen=curve.chosen,
                )
            )

    categories = {c for r in results for c in r.per_category}
    per_category_avg = {
        category: average_metrics(
            [r.per_category[category] for r in results if category in r.per_category]
        )
        for category in categories
    }
    return EvalReport(
        scorer=scorer,
        policy_kind=policy_kind,
        seed=seed,
        tuning=tuning,
        per_fold=tuple(results),
        averaged=average_metrics([r.metrics for r in results]),
        per_category=per_category_avg,
        curves=tuple(curves),
    )


def default_grid(
    table: ScoreTable,
    dataset: Dataset,
    scope: set[str],
    max_points: int | None = None,
) -> list[float]:
    """Distinct scores in scope plus -inf/+inf sentinels.

    With max_points set, large score sets are thinned to evenly spaced
    ranks (extremes kept), which bounds curve rendering cost without
    moving the endpoints.
    """
    values = sorted(
        {table.get(p.argument_id, p.key_point_id) for p in dataset.pairs_in(scope)}
    )
    if max_points is not None and len(values) > max_points:
        step = (len(values) - 1) / (max_points - 1)
        values = [values[round(i * step)] for i in range(max_points)]
    return sorted(set(values) | {-math.inf, math.inf}, reverse=True)


def _fmt(value: float | None, width: int = 7) -> str:
    if value is None:
        return " " * (width - 1) + "-"
    return f"{value:{width}.3f}"


def render_report(report: EvalReport) -> str:
    """Human-readable results table (overall and per category)."""
    lines = []
    lines.append(
        f"scorer: {report.scorer.label()}   policy: "
        f"{report.policy_kind.value if report.policy_kind else '-'}   "
        f"seed: {report.seed}"
    )
    lines.append("")
    lines.append("fold     Acc       P       R      F1")
    for result in report.per_fold:
        m = result.metrics
        lines.append(
            f"{result.fold.index:4d} {_fmt(m.accuracy)} {_fmt(m.precision)}"
            f" {_fmt(m.recall)} {_fmt(m.f1)}"
        )
    avg = report.averaged
    lines.append(
        f"mean {_fmt(avg.accuracy)} {_fmt(avg.precision)}"
        f" {_fmt(avg.recall)} {_fmt(avg.f1)}"
    )
    lines.append("")
    lines.append("category            Acc       P       R      F1")
    names = {
        ArgumentCategory.SINGLE: "single key point",
        ArgumentCategory.MULTIPLE: "multiple key points",
        ArgumentCategory.NO_KEY_POINT: "no key point",
    }
    for category in (
        ArgumentCategory.SINGLE,
        ArgumentCategory.MULTIPLE,
        ArgumentCategory.NO_KEY_POINT,
    ):
        if category not in report.per_category:
            continue
        avg_c = report.per_category[category]
        if category is ArgumentCategory.NO_KEY_POINT:
            # Recall and F1 are undefined without gold positives.
            lines.append(f"{names[category]:<18} {_fmt(avg_c.accuracy)}")
        else:
            lines.append(
                f"{names[category]:<18} {_fmt(avg_c.accuracy)} "
                f"{_fmt(avg_c.precision)} {_fmt(avg_c.recall)} {_fmt(avg_c.f1)}"
            )
    lines.append("")
    return "\n".join(lines)
