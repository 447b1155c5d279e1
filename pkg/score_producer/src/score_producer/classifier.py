"""Sequence-pair classifier backend (fine-tuned transformer checkpoints).

Loads a local checkpoint and scores each (argument, key point) pair
with the sigmoid of the single-logit head (a two-logit head falls back
to the positive-class softmax). Imports are deferred so the embedding
path works without torch installed.
"""

from __future__ import annotations

MAX_LENGTH = 128  # truncation bound for the pair encoding


class PairClassifier:
    def __init__(self, model_path: str):
        try:
            import torch
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
        except ImportError as exc:  # pragma: no cover
            raise RuntimeError(
                "pair-classifier scoring needs torch and transformers"
            ) from exc
        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_path)
        self.model = AutoModelForSequenceClassification.from_pretrained(model_path)
        self.model.eval()

    def score_batch(self, pairs: list[tuple[str, str]]) -> list[float]:
        torch = self._torch
        encoded = self.tokenizer(
            [a for a, _ in pairs],
            [k for _, k in pairs],
            padding=True,
            truncation=True,
            max_length=MAX_LENGTH,
            return_tensors="pt",
        )
        with torch.no_grad():
            logits = self.model(**encoded).logits
        if logits.shape[-1] == 1:
            probs = torch.sigmoid(logits[:, 0])
        else:
            probs = torch.softmax(logits, dim=-1)[:, -1]
        return [float(p) for p in probs]
