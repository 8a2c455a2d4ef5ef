"""Command-line pipeline: generate, train, classify, evaluate.

All randomness flows from explicit ``--seed`` flags, artifacts are plain
JSON/CSV files, and repeated runs with identical inputs produce
byte-identical outputs.  Diagnostics go to stderr; data goes to files and
stdout.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from routecat import evaluation
from routecat.centroid import (
    CentroidModel,
    Mode,
    ModelFormatError,
    dumps_model,
    loads_model,
    train,
    vocabulary_digest,
)
from routecat.corpus import CorpusError, Document, build_vocabulary, load_corpus, split_corpus, vectorize
from routecat.policies import PolicyKind
from routecat.router import (
    ACCEPT_ALL,
    Calibration,
    CalibrationError,
    build_calibration,
    check_matching_vocabulary,
    classify_with_reject,
    dumps_calibration,
    loads_calibration,
    with_threshold,
)
from routecat.taxonomy import TaxonomyError, parse_taxonomy


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for a train or evaluate run."""

    taxonomy_path: Path | None
    corpus_path: Path
    val_fraction: float
    test_fraction: float
    seed: int
    policy: PolicyKind | None
    mode: Mode
    threshold_override: float | None
    accept_all: bool
    out_dir: Path
    jobs: int = 1


class CliError(Exception):
    """User-facing command failure; the message is printed to stderr."""


def _read_text(path: Path, what: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {what} file {path}: {exc}") from exc


def _write_text(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8", newline="\n")


def _fraction(value: str) -> float:
    try:
        f = float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from exc
    if not 0.0 <= f < 1.0:
        raise argparse.ArgumentTypeError(f"fraction must lie in [0, 1): {value}")
    return f


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from exc
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {value}")
    return n


def _load_model_file(path: Path) -> CentroidModel:
    try:
        return loads_model(_read_text(path, "model"))
    except ModelFormatError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _load_calibration_file(path: Path, model: CentroidModel) -> Calibration:
    try:
        calibration, digest = loads_calibration(_read_text(path, "calibration"))
        check_matching_vocabulary(model, digest)
    except CalibrationError as exc:
        raise CliError(f"{path}: {exc}") from exc
    return calibration


def _apply_threshold_flags(calibration: Calibration, args: argparse.Namespace) -> Calibration:
    if args.accept_all:
        return with_threshold(calibration, ACCEPT_ALL, "accept-all")
    if args.threshold is not None:
        return with_threshold(calibration, args.threshold, "manual")
    return calibration


def _run_config(args: argparse.Namespace, with_taxonomy: bool) -> RunConfig:
    return RunConfig(
        taxonomy_path=Path(args.taxonomy) if with_taxonomy else None,
        corpus_path=Path(args.corpus),
        val_fraction=args.val_fraction,
        test_fraction=args.test_fraction,
        seed=args.seed,
        policy=PolicyKind(args.policy) if getattr(args, "policy", None) else None,
        mode=Mode(args.mode) if hasattr(args, "mode") else Mode.POSITIVE_ONLY,
        threshold_override=args.threshold,
        accept_all=args.accept_all,
        out_dir=Path(args.out_dir),
        jobs=getattr(args, "jobs", 1),
    )


def cmd_generate(args: argparse.Namespace) -> int:
    spec = evaluation.SyntheticSpec(
        depth=args.depth,
        branching=args.branching,
        docs_per_leaf=args.docs_per_leaf,
        vocab_per_topic=args.vocab_per_topic,
        noise_vocab_size=args.noise_vocab,
        noise_fraction=args.noise,
        tokens_per_doc=args.tokens_per_doc,
        seed=args.seed,
    )
    taxonomy_text, corpus_text = evaluation.generate_synthetic(spec)
    out = Path(args.out_dir)
    _write_text(out / "taxonomy.tsv", taxonomy_text)
    _write_text(out / "corpus.tsv", corpus_text)
    n_docs = corpus_text.count("\n")
    print(f"wrote {out / 'taxonomy.tsv'} and {out / 'corpus.tsv'} ({n_docs} documents)", file=sys.stderr)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _run_config(args, with_taxonomy=True)
    try:
        taxonomy = parse_taxonomy(_read_text(config.taxonomy_path, "taxonomy"))
    except TaxonomyError as exc:
        raise CliError(f"{config.taxonomy_path}: {exc}") from exc
    try:
        docs = load_corpus(_read_text(config.corpus_path, "corpus"), taxonomy)
    except CorpusError as exc:
        raise CliError(f"{config.corpus_path}: {exc}") from exc
    split = split_corpus(docs, config.val_fraction, config.test_fraction, config.seed)
    if not split.train:
        raise CliError("split produced an empty training set")
    if not split.validation:
        raise CliError("split produced an empty validation set; use a positive --val-fraction")
    vocabulary = build_vocabulary(split.train)
    if config.mode is Mode.BINARY and config.policy is None:
        raise CliError("--mode binary requires --policy")
    model = train(split.train, taxonomy, vocabulary, mode=config.mode, policy=config.policy)
    calibration = build_calibration(
        model,
        split.validation,
        threshold_override=config.threshold_override,
        accept_all=config.accept_all,
    )
    _write_text(config.out_dir / "model.json", dumps_model(model))
    _write_text(
        config.out_dir / "calibration.json",
        dumps_calibration(calibration, vocabulary_digest(vocabulary)),
    )
    weights = " ".join(f"L{d}={w:.4f}" for d, w in sorted(calibration.level_weights.items()))
    print(
        f"trained on {len(split.train)} docs, calibrated on {len(split.validation)}: "
        f"{weights} threshold={calibration.threshold:.6f} gap={calibration.eer_gap:.6f} "
        f"source={calibration.source}",
        file=sys.stderr,
    )
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    model = _load_model_file(Path(args.model))
    calibration = _load_calibration_file(Path(args.calibration), model)
    calibration = _apply_threshold_flags(calibration, args)
    text = _read_text(Path(args.input), "input")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) == 3:
            doc_id, _, body = parts
        elif len(parts) == 2:
            doc_id, body = parts
        else:
            raise CliError(f"{args.input}: line {lineno}: expected doc_id<TAB>[label<TAB>]text")
        vec = vectorize(Document(doc_id=doc_id, label="", text=body), model.vocabulary)
        decision = classify_with_reject(model, calibration, vec)
        verdict = "ACCEPT" if decision.accepted else "REJECT"
        print(f"{doc_id}\t{decision.leaf}\t{decision.reliability:.6f}\t{verdict}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _run_config(args, with_taxonomy=False)
    model = _load_model_file(Path(args.model))
    calibration = _load_calibration_file(Path(args.calibration), model)
    calibration = _apply_threshold_flags(calibration, args)
    try:
        docs = load_corpus(_read_text(config.corpus_path, "corpus"), model.taxonomy)
    except CorpusError as exc:
        raise CliError(f"{config.corpus_path}: {exc}") from exc
    split = split_corpus(docs, config.val_fraction, config.test_fraction, config.seed)
    if not split.test:
        raise CliError("split produced an empty test set; use a positive --test-fraction")
    summary = evaluation.evaluate(model, calibration, split.test)
    flat = evaluation.flat_baseline(split.train, split.test, model.taxonomy, model.vocabulary)
    summary_rows = [evaluation.SummaryRow(problem=args.problem, summary=summary)]
    comparison_rows = [
        evaluation.ComparisonRow(
            problem=args.problem,
            flat=100.0 * flat,
            lcn=100.0 * summary.overall_accuracy,
            proposed=100.0 * summary.boosted_accuracy,
        )
    ]
    _write_text(config.out_dir / "summary.csv", evaluation.summary_csv(summary_rows))
    _write_text(config.out_dir / "comparison.csv", evaluation.comparison_csv(comparison_rows))
    print(evaluation.render_report(summary_rows, comparison_rows), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="routecat",
        description="Hierarchical text categorization with route-confidence accept/reject decisions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded synthetic taxonomy and corpus")
    p.add_argument("--depth", type=_positive_int, default=2)
    p.add_argument("--branching", type=_positive_int, default=3)
    p.add_argument("--docs-per-leaf", type=_positive_int, default=40)
    p.add_argument("--vocab-per-topic", type=_positive_int, default=30)
    p.add_argument("--noise-vocab", type=_positive_int, default=150)
    p.add_argument("--tokens-per-doc", type=_positive_int, default=40)
    p.add_argument("--noise", type=_fraction, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train centroids and calibrate the acceptance threshold")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--val-fraction", type=_fraction, default=0.2)
    p.add_argument("--test-fraction", type=_fraction, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.POSITIVE_ONLY.value)
    p.add_argument("--policy", choices=[k.value for k in PolicyKind], default=None)
    p.add_argument("--threshold", type=float, default=None, help="skip EER and use this threshold")
    p.add_argument("--accept-all", action="store_true", help="threshold -inf: accept everything")
    p.add_argument("--jobs", type=_positive_int, default=1, help="upper bound on worker processes")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="label documents from a file, one decision per line")
    p.add_argument("--model", required=True)
    p.add_argument("--calibration", required=True)
    p.add_argument("--input", required=True, help="doc_id<TAB>[label<TAB>]text lines")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--accept-all", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="score the held-out test split and write report CSVs")
    p.add_argument("--model", required=True)
    p.add_argument("--calibration", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--val-fraction", type=_fraction, default=0.2)
    p.add_argument("--test-fraction", type=_fraction, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--accept-all", action="store_true")
    p.add_argument("--problem", default="synthetic", help="problem name for report rows")
    p.add_argument("--jobs", type=_positive_int, default=1, help="upper bound on worker processes")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TaxonomyError, CorpusError, ModelFormatError, CalibrationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
