"""Command line surface tying the modules into reproducible runs.

Exit codes: 0 success, 1 validation failure, 2 I/O failure. Every run
writes a manifest sufficient to replay it byte-identically.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .annotation import build_gold_dataset, read_catalog, read_judgments
from .corpus import (
    DEFAULT_COLUMN_MAP,
    DatasetError,
    ROLES,
    load_dataset,
    write_dataset,
)
from .evaluation import (
    Curve,
    EvaluationError,
    ScorerSpec,
    coverage_curve,
    default_tuning,
    learn_policy_config,
    make_folds,
    pr_curve,
    render_report,
    run_experiment,
    default_grid,
)
from .policies import MethodKind, PolicyKind, tuning_split
from .scoring import ScoreFileError, load_scores, score_dataset_tfidf

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _add_column_flags(parser: argparse.ArgumentParser) -> None:
    for role in ROLES + ("quality",):
        parser.add_argument(
            f"--col-{role.replace('_', '-')}",
            dest=f"col_{role}",
            default=DEFAULT_COLUMN_MAP[role],
            metavar="NAME",
            help=f"column holding the {role.replace('_', ' ')} (default %(default)s)",
        )


def _column_map(args: argparse.Namespace) -> dict[str, str]:
    return {role: getattr(args, f"col_{role}") for role in ROLES + ("quality",)}


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return p


def _write_manifest(path: Path, payload: dict) -> None:
    payload = dict(payload)
    payload["tool_version"] = __version__
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_curve(path: Path, curve: Curve) -> None:
    def cell(value: float | None) -> str:
        return "" if value is None else repr(value)

    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["threshold", "precision", "recall", "f1"])
        for point in curve.points:
            writer.writerow(
                [
                    cell(point.threshold),
                    cell(point.precision),
                    cell(point.recall),
                    cell(point.f1),
                ]
            )


def _curve_summary(curve: Curve) -> dict:
    def point_dict(point) -> dict | None:
        if point is None:
            return None
        return {
            "threshold": point.threshold,
            "precision": point.precision,
            "recall": point.recall,
            "f1": point.f1,
        }

    return {
        "policy": curve.name,
        "best_f1": point_dict(curve.best),
        "chosen": point_dict(curve.chosen),
    }


def cmd_build_dataset(args: argparse.Namespace) -> int:
    judgments = read_judgments(_require_file(args.judgments))
    arguments, key_points = read_catalog(_require_file(args.catalog))
    dataset, report = build_gold_dataset(
        judgments,
        arguments,
        key_points,
        majority=args.majority,
        min_judgments=args.min_judgments,
        positive_min=args.positive_min,
        negative_max=args.negative_max,
        min_matches_per_kp=args.min_matches_per_kp,
        max_stance_error=args.max_stance_error,
        min_kappa=args.min_kappa,
        min_shared=args.min_shared,
        min_partners=args.min_partners,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset(dataset, out)
    stats_path = Path(args.stats) if args.stats else out.with_suffix(".stats.json")
    stats_path.write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _write_manifest(
        out.parent / (out.stem + ".manifest.json"),
        {
            "command": "build-dataset",
            "judgments": args.judgments,
            "catalog": args.catalog,
            "parameters": {
                "majority": args.majority,
                "min_judgments": args.min_judgments,
                "positive_min": args.positive_min,
                "negative_max": args.negative_max,
                "min_matches_per_kp": args.min_matches_per_kp,
                "max_stance_error": args.max_stance_error,
                "min_kappa": args.min_kappa,
                "min_shared": args.min_shared,
                "min_partners": args.min_partners,
            },
        },
    )
    print(
        f"wrote {report.pair_count} pairs ({report.positive_count} positive) "
        f"to {out}; stats in {stats_path}"
    )
    return EXIT_OK


def _parse_policy(token: str) -> PolicyKind:
    try:
        return PolicyKind(token)
    except ValueError:
        raise EvaluationError(f"unknown policy {token!r}") from None


def _parse_tuning(token: str) -> MethodKind | None:
    if token == "auto":
        return None
    return MethodKind(token)


def cmd_evaluate(args: argparse.Namespace) -> int:
    dataset = load_dataset(_require_file(args.dataset), _column_map(args))
    scorer = ScorerSpec.parse(args.scorer)
    if scorer.kind == "external":
        _require_file(scorer.path)
    policy = _parse_policy(args.policy)
    tuning = _parse_tuning(args.tuning)
    report = run_experiment(
        dataset,
        scorer,
        policy_kind=None if scorer.kind in ("majority", "random") else policy,
        seed=args.seed,
        tuning=tuning,
        with_curves=not args.no_curves,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(render_report(report), encoding="utf-8")
    curves_dir = out / "curves"
    if report.curves:
        curves_dir.mkdir(exist_ok=True)
        for curve in report.curves:
            _write_curve(curves_dir / f"{curve.name}.csv", curve)
    _write_manifest(
        out / "manifest.json",
        {
            "command": "evaluate",
            "dataset": args.dataset,
            "column_map": _column_map(args),
            "seed": args.seed,
            "scorer": scorer.label(),
            "policy": policy.value,
            "tuning": report.tuning.value if report.tuning else None,
            "results": report.to_json_dict(),
        },
    )
    sys.stdout.write(render_report(report))
    return EXIT_OK


def cmd_curves(args: argparse.Namespace) -> int:
    dataset = load_dataset(_require_file(args.dataset), _column_map(args))
    scorer = ScorerSpec.parse(args.scorer)
    if scorer.kind in ("majority", "random"):
        raise EvaluationError("curves need a scoring method, not a baseline")
    folds = make_folds(dataset.topics, args.seed, strict=False)
    if not 0 <= args.fold < len(folds):
        raise EvaluationError(f"fold index {args.fold} out of range")
    fold = folds[args.fold]
    tuning = _parse_tuning(args.tuning) or default_tuning(scorer)
    assert tuning is not None

    if scorer.kind == "tfidf":
        fit_scope = set(fold.train_topics) | set(fold.dev_topics)
        table = score_dataset_tfidf(
            dataset, fit_scope, fit_scope | set(fold.test_topics)
        )
    else:
        _require_file(scorer.path)
        table = load_scores(scorer.path, dataset)

    tuning_topics = tuning_split(fold, tuning)
    test = set(fold.test_topics)
    grid = default_grid(table, dataset, test, max_points=args.grid_points)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summaries = []
    configs = {}
    for policy in PolicyKind:
        config = learn_policy_config(policy, table, dataset, tuning_topics)
        configs[policy.value] = config
        curve = pr_curve(
            policy,
            table,
            dataset,
            test,
            grid,
            theta_high=config.theta_high,
            chosen=config,
        )
        _write_curve(out / f"{policy.value}.csv", curve)
        summaries.append(_curve_summary(curve))
    (out / "summary.json").write_text(
        json.dumps(summaries, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _write_manifest(
        out / "manifest.json",
        {
            "command": "curves",
            "dataset": args.dataset,
            "column_map": _column_map(args),
            "seed": args.seed,
            "fold": args.fold,
            "scorer": scorer.label(),
            "tuning": tuning.value,
            "configs": {
                name: {
                    "theta": c.theta,
                    "theta_low": c.theta_low,
                    "theta_high": c.theta_high,
                }
                for name, c in sorted(configs.items())
            },
        },
    )
    print(f"wrote {len(summaries)} curve files to {out}")
    return EXIT_OK


def cmd_coverage(args: argparse.Namespace) -> int:
    dataset = load_dataset(_require_file(args.dataset), _column_map(args))
    if not dataset.pairs:
        raise DatasetError("dataset has no pairs")
    curve = coverage_curve(dataset)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "mean_coverage"])
        for k, value in curve:
            writer.writerow([k, repr(value)])
    _write_manifest(
        out.parent / (out.stem + ".manifest.json"),
        {
            "command": "coverage",
            "dataset": args.dataset,
            "column_map": _column_map(args),
        },
    )
    print(f"wrote coverage curve ({len(curve)} points) to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpmatch",
        description="Argument-to-key-point matching: dataset building, "
        "evaluation, curves.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dataset", help="consolidate raw judgments into a dataset")
    p.add_argument("--judgments", required=True, help="raw judgments CSV")
    p.add_argument(
        "--catalog",
        required=True,
        help="arguments and key points with gold stances (kind,id,text,topic,stance)",
    )
    p.add_argument("--out", required=True, help="output dataset CSV")
    p.add_argument("--stats", default=None, help="statistics report path")
    p.add_argument("--majority", type=float, default=0.6)
    p.add_argument("--min-judgments", type=int, default=7)
    p.add_argument("--positive-min", type=float, default=0.6)
    p.add_argument("--negative-max", type=float, default=0.15)
    p.add_argument("--min-matches-per-kp", type=int, default=3)
    p.add_argument("--max-stance-error", type=float, default=0.10)
    p.add_argument("--min-kappa", type=float, default=0.3)
    p.add_argument("--min-shared", type=int, default=50)
    p.add_argument("--min-partners", type=int, default=5)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("evaluate", help="cross-validated evaluation")
    p.add_argument("--dataset", required=True)
    p.add_argument(
        "--scorer",
        required=True,
        help="tfidf | external=PATH | majority | random[=P]",
    )
    p.add_argument(
        "--policy",
        default="threshold",
        help="threshold | best-match | bm-threshold | dual-threshold",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--tuning",
        default="auto",
        choices=["auto", "supervised", "unsupervised"],
        help="threshold tuning split (auto: dev for external, train+dev for tfidf)",
    )
    p.add_argument("--no-curves", action="store_true", help="skip per-fold curves")
    p.add_argument("--out", required=True, help="output directory")
    _add_column_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("curves", help="PR trade-off curves for one fold, all policies")
    p.add_argument("--dataset", required=True)
    p.add_argument("--scorer", required=True, help="tfidf | external=PATH")
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--tuning",
        default="auto",
        choices=["auto", "supervised", "unsupervised"],
    )
    p.add_argument(
        "--grid-points",
        type=int,
        default=256,
        help="max threshold grid points per curve (extremes kept)",
    )
    p.add_argument("--out", required=True, help="output directory")
    _add_column_flags(p)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("coverage", help="argument coverage per number of key points")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    _add_column_flags(p)
    p.set_defaults(func=cmd_coverage)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DatasetError, ScoreFileError, EvaluationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
