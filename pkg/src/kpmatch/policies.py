"""Key point selection policies and threshold learning.

Four policies turn per-candidate match scores into matched key points
per argument: a plain score threshold, best match, best match gated by
a threshold, and a dual-threshold rule allowing up to two matches.
Thresholds are learned by exhaustive F1 maximization over the observed
scores; "score exceeds the threshold" is implemented as score >= theta
throughout, which keeps the candidate set finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .corpus import Dataset
from .scoring import ScoreTable


class PolicyKind(Enum):
    THRESHOLD = "threshold"
    BEST_MATCH = "best-match"
    BM_THRESHOLD = "bm-threshold"
    DUAL_THRESHOLD = "dual-threshold"


class MethodKind(Enum):
    """Whether a match scorer needed labeled data to produce scores;
    decides which topics thresholds are tuned on."""

    SUPERVISED = "supervised"
    UNSUPERVISED = "unsupervised"


@dataclass(frozen=True)
class PolicyConfig:
    kind: PolicyKind
    theta: float | None = None
    theta_low: float | None = None
    theta_high: float | None = None

    def __post_init__(self) -> None:
        if self.kind in (PolicyKind.THRESHOLD, PolicyKind.BM_THRESHOLD):
            if self.theta is None:
                raise ValueError(f"{self.kind.value} requires theta")
        elif self.kind is PolicyKind.DUAL_THRESHOLD:
            if self.theta_low is None or self.theta_high is None:
                raise ValueError("dual-threshold requires theta_low and theta_high")
            if self.theta_low > self.theta_high:
                raise ValueError("theta_low must not exceed theta_high")


@dataclass(frozen=True)
class Prediction:
    argument_id: str
    matched_key_point_ids: frozenset[str]


def _ranked_candidates(
    scores: ScoreTable, dataset: Dataset, argument_id: str
) -> list[tuple[str, float]]:
    """Candidates with scores, best first; ties broken by smallest id."""
    ranked = [
        (kp_id, scores.get(argument_id, kp_id))
        for kp_id in dataset.candidates(argument_id)
    ]
    if not ranked:
        raise ValueError(f"argument {argument_id!r} has no scored candidates")
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked


def apply_policy(
    config: PolicyConfig,
    scores: ScoreTable,
    dataset: Dataset,
    argument_id: str,
) -> Prediction:
    """Select matched key points for one argument."""
    ranked = _ranked_candidates(scores, dataset, argument_id)
    kind = config.kind
    if kind is PolicyKind.THRESHOLD:
        matched = {kp for kp, score in ranked if score >= config.theta}
    elif kind is PolicyKind.BEST_MATCH:
        matched = {ranked[0][0]}
    elif kind is PolicyKind.BM_THRESHOLD:
        matched = {ranked[0][0]} if ranked[0][1] >= config.theta else set()
    elif kind is PolicyKind.DUAL_THRESHOLD:
        top_id, top_score = ranked[0]
        if (
            len(ranked) >= 2
            and ranked[1][1] >= config.theta_low
            and top_score >= config.theta_high
        ):
            matched = {top_id, ranked[1][0]}
        elif top_score >= config.theta_low:
            matched = {top_id}
        else:
            matched = set()
    else:  # pragma: no cover
        raise ValueError(f"unknown policy kind {kind!r}")
    return Prediction(argument_id, frozenset(matched))


def predict_all(
    config: PolicyConfig,
    scores: ScoreTable,
    dataset: Dataset,
    topics: Iterable[str],
) -> list[Prediction]:
    scope = set(topics)
    return [
        apply_policy(config, scores, dataset, arg.id)
        for arg in sorted(dataset.arguments_in(scope), key=lambda a: a.id)
    ]


def learn_threshold(pairs: Iterable[tuple[float, bool]]) -> float:
    """Threshold maximizing positive-class F1 of `score >= theta`.

    Candidates are the distinct observed scores plus a +inf sentinel
    (match nothing); the sentinel's F1 is undefined and never wins.
    Ties break toward the largest theta. Raises ValueError without any
    positive pair.
    """
    items = sorted(pairs, key=lambda item: -item[0])
    total_pos = sum(1 for _, label in items if label)
    if total_pos == 0:
        raise ValueError("no positive pairs: F1 undefined for every threshold")
    best_theta = math.inf
    best_f1 = -1.0
    tp = 0
    predicted = 0
    i = 0
    n = len(items)
    while i < n:
        theta = items[i][0]
        while i < n and items[i][0] == theta:
            predicted += 1
            tp += items[i][1]
            i += 1
        # F1 = 2tp / (2tp + fp + fn) = 2tp / (predicted + total_pos)
        f1 = 2 * tp / (predicted + total_pos)
        if f1 > best_f1:
            best_f1 = f1
            best_theta = theta
    return best_theta


def _top_two(
    group: Sequence[tuple[str, float, bool]]
) -> tuple[float, int, float, int]:
    if not group:
        raise ValueError("empty candidate group")
    ranked = sorted(group, key=lambda item: (-item[1], item[0]))
    s1, a1 = ranked[0][1], int(ranked[0][2])
    if len(ranked) >= 2:
        return s1, a1, ranked[1][1], int(ranked[1][2])
    return s1, a1, -math.inf, 0


def learn_bm_threshold(
    groups: Iterable[Sequence[tuple[str, float, bool]]]
) -> float:
    """Threshold maximizing F1 of best-match-gated predictions.

    Groups hold one (key point id, score, label) triple per candidate
    of one argument. Candidates are the distinct observed scores plus
    +inf; ties break toward the largest theta.
    """
    tops: list[tuple[float, int]] = []
    total_pos = 0
    all_scores: set[float] = set()
    for group in groups:
        s1, a1, _, _ = _top_two(group)
        tops.append((s1, a1))
        total_pos += sum(1 for _, _, label in group if label)
        all_scores.update(score for _, score, _ in group)
    if total_pos == 0:
        raise ValueError("no positive pairs: F1 undefined for every threshold")
    tops.sort(key=lambda item: -item[0])
    best_theta = math.inf
    best_f1 = -1.0
    tp = 0
    predicted = 0
    i = 0
    # Only top-score values change predictions, but sweeping every
    # observed score keeps the tie-break identical to the full grid.
    for theta in sorted(all_scores, reverse=True):
        while i < len(tops) and tops[i][0] >= theta:
            predicted += 1
            tp += tops[i][1]
            i += 1
        f1 = 2 * tp / (predicted + total_pos)
        if f1 > best_f1:
            best_f1 = f1
            best_theta = theta
    return best_theta


def learn_dual_thresholds(
    groups: Iterable[Sequence[tuple[str, float, bool]]]
) -> tuple[float, float]:
    """(theta_low, theta_high) maximizing F1 of dual-threshold predictions.

    Exhaustive over candidate pairs drawn from the distinct observed
    scores plus +inf, constrained theta_low <= theta_high; ties break
    toward the larger (theta_high, then theta_low). The search runs on
    the per-argument top-2 boundary values, which yields the same
    argmax and tie-break winner as the full observed-score grid
    (predictions only change at top-2 boundaries, and the winner under
    largest-value tie-breaking is always a boundary value or +inf).
    """
    s1_list: list[float] = []
    s2_list: list[float] = []
    a1_list: list[int] = []
    a2_list: list[int] = []
    total_pos = 0
    for group in groups:
        s1, a1, s2, a2 = _top_two(group)
        s1_list.append(s1)
        a1_list.append(a1)
        s2_list.append(s2)
        a2_list.append(a2)
        total_pos += sum(1 for _, _, label in group if label)
    if total_pos == 0:
        raise ValueError("no positive pairs: F1 undefined for every threshold")

    s1 = np.asarray(s1_list)
    s2 = np.asarray(s2_list)
    a1 = np.asarray(a1_list)
    a2 = np.asarray(a2_list)

    lo_vals = np.unique(
        np.concatenate([s1, s2[np.isfinite(s2)], [math.inf]])
    )  # ascending
    n_lo = len(lo_vals)

    # Suffix statistics over all arguments: counts / positive tops with
    # top score >= lo, evaluated on the lo grid.
    order = np.argsort(s1, kind="stable")
    s1_sorted = s1[order]
    a1_sorted = a1[order]
    idx = np.searchsorted(s1_sorted, lo_vals, side="left")
    a1_suffix = np.concatenate([np.cumsum(a1_sorted[::-1])[::-1], [0]])
    c1_ge_lo = len(s1_sorted) - idx
    t1_ge_lo = a1_suffix[idx]

    # Running state over arguments whose top score >= current theta_high.
    n2_ge = np.zeros(n_lo)  # second score >= lo, count
    t2_pair = np.zeros(n_lo)  # both-regime true positives (a1 + a2)
    t2_top = np.zeros(n_lo)  # a1 mass of args whose second score >= lo
    in_a_count = 0
    in_a_top_pos = 0

    by_s1_desc = np.argsort(-s1, kind="stable")
    hi_candidates = [math.inf] + sorted(set(s1_list), reverse=True)

    best: tuple[float, float, float] | None = None  # (f1, hi, lo)
    join_pos = 0
    for hi in hi_candidates:
        while join_pos < len(by_s1_desc) and s1[by_s1_desc[join_pos]] >= hi:
            g = by_s1_desc[join_pos]
            join_pos += 1
            in_a_count += 1
            in_a_top_pos += a1_list[g]
            if math.isfinite(s2_list[g]):
                j = np.searchsorted(lo_vals, s2_list[g], side="right")
                n2_ge[:j] += 1
                t2_pair[:j] += a1_list[g] + a2_list[g]
                t2_top[:j] += a1_list[g]
        k = int(np.searchsorted(lo_vals, hi, side="right"))  # lo <= hi
        if k == 0:
            continue
        tp = t2_pair[:k] - t2_top[:k] + t1_ge_lo[:k]
        predicted = n2_ge[:k] + c1_ge_lo[:k]
        f1 = 2 * tp / (predicted + total_pos)
        # Cells predicting nothing have undefined F1 and never win.
        f1 = np.where(predicted > 0, f1, -1.0)
        # Largest lo wins ties within a row; hi descends, so the first
        # strictly-better row wins ties on hi.
        local = k - 1 - int(np.argmax(f1[::-1]))
        if best is None or f1[local] > best[0]:
            best = (float(f1[local]), hi, float(lo_vals[local]))
    assert best is not None
    return best[2], best[1]


def tuning_split(fold, method_kind: MethodKind) -> frozenset[str]:
    """Topics whose pairs tune thresholds for a fold.

    Supervised scorers tune on the development topics; unsupervised
    scorers tune on train plus development topics.
    """
    if method_kind is MethodKind.SUPERVISED:
        return frozenset(fold.dev_topics)
    return frozenset(fold.train_topics) | frozenset(fold.dev_topics)
