#!/usr/bin/env python3
"""Optional: fine-tune a sequence-pair classifier on a labeled pair dataset.

Trains a single-logit head with binary cross entropy for 3 epochs at
learning rate 2e-5, then saves a checkpoint usable with
`score-producer --model-kind pair-classifier --model <out_dir>`.
Requires torch and transformers, and a base checkpoint (local path or
hub name reachable in your environment).
"""

from __future__ import annotations

import argparse
import csv
import random


def read_examples(path):
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    return [(r["argument"], r["key_point"], float(r["label"])) for r in rows]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", required=True, help="training pair CSV")
    parser.add_argument("--base-model", required=True, help="base checkpoint")
    parser.add_argument("--out", required=True, help="output checkpoint dir")
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--learning-rate", type=float, default=2e-5)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--max-length", type=int, default=128)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    import torch
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    torch.manual_seed(args.seed)
    random.seed(args.seed)

    tokenizer = AutoTokenizer.from_pretrained(args.base_model)
    model = AutoModelForSequenceClassification.from_pretrained(
        args.base_model, num_labels=1
    )
    optimizer = torch.optim.AdamW(model.parameters(), lr=args.learning_rate)
    loss_fn = torch.nn.BCEWithLogitsLoss()

    examples = read_examples(args.dataset)
    model.train()
    for epoch in range(args.epochs):
        random.shuffle(examples)
        total = 0.0
        for start in range(0, len(examples), args.batch_size):
            batch = examples[start : start + args.batch_size]
            encoded = tokenizer(
                [a for a, _, _ in batch],
                [k for _, k, _ in batch],
                padding=True,
                truncation=True,
                max_length=args.max_length,
                return_tensors="pt",
            )
            labels = torch.tensor([[y] for _, _, y in batch])
            optimizer.zero_grad()
            logits = model(**encoded).logits
            loss = loss_fn(logits, labels)
            loss.backward()
            optimizer.step()
            total += float(loss)
        print(f"epoch {epoch}: mean loss {total / max(1, len(examples)):.5f}")

    model.save_pretrained(args.out)
    tokenizer.save_pretrained(args.out)
    print(f"saved checkpoint to {args.out}")


if __name__ == "__main__":
    main()
