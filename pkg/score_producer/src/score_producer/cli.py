"""Command line entry point for the score exporter."""

from __future__ import annotations

import argparse
import sys

from .exporter import ModelKind, ProducerConfig, export_scores


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="score-producer",
        description="Export match scores for a pair dataset in the "
        "toolkit's score-file format.",
    )
    parser.add_argument("--dataset", required=True, help="pair dataset CSV")
    parser.add_argument(
        "--model-kind",
        required=True,
        choices=[k.value for k in ModelKind],
    )
    parser.add_argument(
        "--model",
        required=True,
        help="embedding spec (const:<dim> | hash:<dim>[:seed] | "
        "vectors:<path>) or a classifier checkpoint path",
    )
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--out", required=True, help="output score CSV")
    args = parser.parse_args(argv)

    config = ProducerConfig(
        model_kind=ModelKind(args.model_kind),
        model=args.model,
        output_path=args.out,
        batch_size=args.batch_size,
    )
    try:
        path = export_scores(args.dataset, config)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote scores to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
