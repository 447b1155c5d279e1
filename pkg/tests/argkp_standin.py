"""Deterministic ArgKP-shaped corpus for the test suite.

The public ArgKP release is not bundled, so the suite generates a
stand-in with exactly the published global statistics: 28 topics,
6,515 arguments, 243 key points, 24,093 labeled pairs of which 4,998
are positive. Texts are synthetic but share vocabulary so that lexical
scorers see a weak, realistic signal; argument length and quality vary
by match category the way the real data does.

Set ARGKP_CSV to a real release file to run the dataset-level
acceptance checks against it instead.
"""

from __future__ import annotations

import csv
import random
from pathlib import Path

TOPIC_COUNT = 28
TARGET_PAIRS = 24_093
TARGET_POSITIVES = 4_998
TARGET_ARGUMENTS = 6_515
TARGET_KEY_POINTS = 243

# Probability that a positive argument reuses each content word of its
# gold key point; the main lexical-signal knob. Calibrated so that the
# tf-idf scorer with a learned threshold lands near the mid-0.3s in F1.
GOLD_WORD_PROB = 0.12
CONFUSION_PROB = 0.5

_CONSONANTS = "bcdfglmnprstvz"
_VOWELS = "aeiou"


def _make_words(rng: random.Random, count: int, syllables: tuple[int, int]) -> list[str]:
    words: list[str] = []
    seen = set()
    while len(words) < count:
        n = rng.randint(*syllables)
        word = "".join(
            rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(n)
        )
        if rng.random() < 0.4:
            word += rng.choice(_CONSONANTS)
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _topic_plan() -> list[dict]:
    """Exact per-topic allocation of key points, arguments, categories
    and pair counts; sums hit the published totals."""
    nine_kp_splits = [(5, 4), (6, 3), (7, 2)]
    eight_kp_splits = [(4, 4), (5, 3), (6, 2)]
    plan = []
    for t in range(TOPIC_COUNT):
        if t < 19:
            split = nine_kp_splits[t % 3]
            n_args = 233
        else:
            split = eight_kp_splits[(t - 19) % 3]
            n_args = 232
        plan.append(
            {
                "kp_split": split,
                "n_args": n_args,
                "multi": 12 if t < 18 else 11,
                "single": 156 if t < 6 else 155,
                "pairs": 861 if t < 13 else 860,
            }
        )
    assert sum(sum(p["kp_split"]) for p in plan) == TARGET_KEY_POINTS
    assert sum(p["n_args"] for p in plan) == TARGET_ARGUMENTS
    assert sum(p["pairs"] for p in plan) == TARGET_PAIRS
    assert (
        sum(p["single"] for p in plan) + 2 * sum(p["multi"] for p in plan)
        == TARGET_POSITIVES
    )
    return plan


def _positive_counts(rng, n_kps: int, total: int) -> list[int]:
    """Per-key-point positive counts: a floor of 3, remainder shared
    with decaying weights (salient first)."""
    counts = [3] * n_kps
    weights = [1.0 / (r + 1) for r in range(n_kps)]
    remaining = total - 3 * n_kps
    assert remaining >= 0
    scale = sum(weights)
    shares = [int(remaining * w / scale) for w in weights]
    for i in range(remaining - sum(shares)):
        shares[i % n_kps] += 1
    return [c + s for c, s in zip(counts, shares)]


def _assign_gold(rng, kp_ids, counts, single_args, multi_args):
    """Assign gold key points honoring exact per-key-point counts."""
    remaining = dict(zip(kp_ids, counts))
    gold: dict[str, set[str]] = {}
    for arg in multi_args:
        # Two distinct key points: a weighted first pick keeps the
        # mapping varied, a largest-remainder second pick keeps the
        # exact counts feasible.
        pool = [kp for kp, c in remaining.items() if c > 0]
        assert len(pool) >= 2, "not enough key point capacity for a double match"
        first = rng.choices(pool, weights=[remaining[kp] for kp in pool], k=1)[0]
        others = [kp for kp in pool if kp != first]
        second = max(others, key=lambda kp: (remaining[kp], kp))
        gold[arg] = {first, second}
        remaining[first] -= 1
        remaining[second] -= 1
    for arg in single_args:
        pool = [kp for kp, c in remaining.items() if c > 0]
        pick = rng.choices(pool, weights=[remaining[kp] for kp in pool], k=1)[0]
        gold[arg] = {pick}
        remaining[pick] -= 1
    assert all(c == 0 for c in remaining.values())
    return gold


class _TextBuilder:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.function_words = _make_words(rng, 50, (1, 2))
        self.content_pool = _make_words(rng, 2200, (2, 3))

    def topic_theme(self) -> list[str]:
        return self.rng.sample(self.content_pool, 12)

    def key_point_text(self, theme: list[str]) -> tuple[str, list[str]]:
        content = self.rng.sample(theme, 3) + self.rng.sample(self.content_pool, 2)
        fillers = self.rng.choices(self.function_words, k=self.rng.randint(4, 6))
        words = fillers[:2] + content + fillers[2:]
        self.rng.shuffle(words)
        return " ".join(words).capitalize() + ".", content

    def argument_text(
        self,
        theme: list[str],
        gold_content: list[list[str]],
        other_content: list[list[str]],
        target_tokens: int,
        two_sentences: bool,
    ) -> str:
        words = self.rng.sample(theme, 2)
        for content in gold_content:
            words += [w for w in content if self.rng.random() < GOLD_WORD_PROB]
        if other_content and self.rng.random() < CONFUSION_PROB:
            words.append(self.rng.choice(self.rng.choice(other_content)))
        while len(words) < target_tokens:
            if self.rng.random() < 0.55:
                words.append(self.rng.choice(self.function_words))
            else:
                words.append(self.rng.choice(self.content_pool))
        self.rng.shuffle(words)
        if two_sentences and len(words) > 4:
            cut = self.rng.randint(2, len(words) - 2)
            first = " ".join(words[:cut]).capitalize()
            second = " ".join(words[cut:]).capitalize()
            return f"{first}. {second}."
        return " ".join(words).capitalize() + "."


_QUALITY = {
    "none": (0.78, 0.04),
    "single": (0.84, 0.04),
    "multi": (0.91, 0.03),
}

_TOKENS = {
    "none": (13, 18),
    "single": (15, 21),
    "multi": (20, 26),
}


def build_argkp_standin(path: str | Path, seed: int = 7) -> Path:
    """Write the stand-in corpus as CSV (public-release header plus a
    quality column); returns the path."""
    rng = random.Random(seed)
    text = _TextBuilder(rng)
    plan = _topic_plan()

    verbs = ["ban", "adopt", "subsidize", "abandon", "legalize", "limit", "expand"]
    topic_nouns = _make_words(rng, TOPIC_COUNT, (2, 3))

    rows: list[list[str]] = []
    total_positives = 0
    for t, spec in enumerate(plan):
        topic = f"We should {verbs[t % len(verbs)]} {topic_nouns[t]}"
        theme = text.topic_theme()
        n_pro = (spec["n_args"] + 1) // 2
        stance_sides = [
            ("1", "p", spec["kp_split"][0], n_pro),
            ("-1", "c", spec["kp_split"][1], spec["n_args"] - n_pro),
        ]

        pair_rows: list[tuple[str, str, str, str, str, bool, float]] = []
        for stance_token, tag, n_kps, n_side_args in stance_sides:
            kp_ids = [f"kp_{t:02d}_{tag}{j}" for j in range(n_kps)]
            kp_text = {}
            kp_content = {}
            for kp_id in kp_ids:
                kp_text[kp_id], kp_content[kp_id] = text.key_point_text(theme)

            multi_n = spec["multi"] // 2 + (
                spec["multi"] % 2 if stance_token == "1" else 0
            )
            single_n = spec["single"] // 2 + (
                spec["single"] % 2 if stance_token == "1" else 0
            )
            arg_ids = [f"arg_{t:02d}_{tag}{i:03d}" for i in range(n_side_args)]
            multi_args = arg_ids[:multi_n]
            single_args = arg_ids[multi_n : multi_n + single_n]
            zero_args = arg_ids[multi_n + single_n :]

            counts = _positive_counts(rng, n_kps, single_n + 2 * multi_n)
            gold = _assign_gold(rng, kp_ids, counts, single_args, multi_args)
            total_positives += sum(len(g) for g in gold.values())

            for arg_id in arg_ids:
                matched = gold.get(arg_id, set())
                kind = (
                    "multi"
                    if len(matched) == 2
                    else "single"
                    if len(matched) == 1
                    else "none"
                )
                mean, sd = _QUALITY[kind]
                quality = min(1.0, max(0.5, rng.gauss(mean, sd)))
                arg_text = text.argument_text(
                    theme,
                    [kp_content[kp] for kp in sorted(matched)],
                    [kp_content[kp] for kp in kp_ids if kp not in matched],
                    rng.randint(*_TOKENS[kind]),
                    two_sentences=(kind == "multi" or rng.random() < 0.15),
                )
                for kp_id in kp_ids:
                    pair_rows.append(
                        (
                            arg_id,
                            kp_id,
                            arg_text,
                            kp_text[kp_id],
                            stance_token,
                            kp_id in matched,
                            round(quality, 4),
                        )
                    )

        # Trim negatives down to the exact per-topic pair budget while
        # keeping at least one pair per argument.
        keep = [True] * len(pair_rows)
        per_arg = {}
        for row in pair_rows:
            per_arg[row[0]] = per_arg.get(row[0], 0) + 1
        droppable = [i for i, row in enumerate(pair_rows) if not row[5]]
        rng.shuffle(droppable)
        to_drop = len(pair_rows) - spec["pairs"]
        assert to_drop >= 0, f"topic {t}: too few candidate pairs"
        for i in droppable:
            if to_drop == 0:
                break
            arg_id = pair_rows[i][0]
            if per_arg[arg_id] <= 1:
                continue
            keep[i] = False
            per_arg[arg_id] -= 1
            to_drop -= 1
        assert to_drop == 0, f"topic {t}: could not reach pair budget"

        for i, row in enumerate(pair_rows):
            if keep[i]:
                arg_id, kp_id, arg_text, kp_txt, stance_token, label, quality = row
                rows.append(
                    [
                        arg_id,
                        kp_id,
                        arg_text,
                        kp_txt,
                        topic,
                        stance_token,
                        "1" if label else "0",
                        repr(quality),
                    ]
                )

    assert total_positives == TARGET_POSITIVES
    assert len(rows) == TARGET_PAIRS
    assert sum(1 for r in rows if r[6] == "1") == TARGET_POSITIVES

    rng.shuffle(rows)
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "arg_id",
                "key_point_id",
                "argument",
                "key_point",
                "topic",
                "stance",
                "label",
                "quality",
            ]
        )
        writer.writerows(rows)
    return path
