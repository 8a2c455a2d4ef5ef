#!/usr/bin/env python3
"""Seeded rejection-boost experiment on synthetic corpora.

Generates a noisy hierarchical corpus per seed, trains the per-node
centroid router, calibrates level weights and the EER threshold on the
validation split, and reports how much accuracy the reject option buys on
the test split, next to the flat baseline.

Example:
    python scripts/run_boost_experiment.py --depth 3 --branching 3 \
        --docs-per-leaf 50 --noise 0.45 --tokens-per-doc 13 --seeds 10
"""

from __future__ import annotations

import argparse

from routecat.centroid import train
from routecat.corpus import build_vocabulary, load_corpus, split_corpus
from routecat.evaluation import (
    ComparisonRow,
    SummaryRow,
    SyntheticSpec,
    evaluate,
    flat_baseline,
    generate_synthetic,
    render_report,
)
from routecat.router import build_calibration
from routecat.taxonomy import parse_taxonomy


def run_one(spec: SyntheticSpec, val_fraction: float, test_fraction: float):
    taxonomy_text, corpus_text = generate_synthetic(spec)
    taxonomy = parse_taxonomy(taxonomy_text)
    docs = load_corpus(corpus_text, taxonomy)
    split = split_corpus(docs, val_fraction, test_fraction, spec.seed)
    vocab = build_vocabulary(split.train)
    model = train(split.train, taxonomy, vocab)
    calibration = build_calibration(model, split.validation)
    summary = evaluate(model, calibration, split.test)
    flat = flat_baseline(split.train, split.test, taxonomy, vocab)
    return summary, flat, calibration


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--depth", type=int, default=3)
    parser.add_argument("--branching", type=int, default=3)
    parser.add_argument("--docs-per-leaf", type=int, default=50)
    parser.add_argument("--vocab-per-topic", type=int, default=35)
    parser.add_argument("--noise-vocab", type=int, default=150)
    parser.add_argument("--tokens-per-doc", type=int, default=13)
    parser.add_argument("--noise", type=float, default=0.45)
    parser.add_argument("--val-fraction", type=float, default=0.30)
    parser.add_argument("--test-fraction", type=float, default=0.30)
    parser.add_argument("--seeds", type=int, default=10, help="run seeds 0..N-1")
    args = parser.parse_args()

    print(f"{'seed':>4} {'overall':>9} {'boosted':>9} {'boost(pp)':>10} {'rejected':>9} {'EER gap':>9}")
    boosts, rejections, summaries = [], [], []
    flats, lcns, proposeds = [], [], []
    for seed in range(args.seeds):
        spec = SyntheticSpec(
            depth=args.depth,
            branching=args.branching,
            docs_per_leaf=args.docs_per_leaf,
            vocab_per_topic=args.vocab_per_topic,
            noise_vocab_size=args.noise_vocab,
            noise_fraction=args.noise,
            tokens_per_doc=args.tokens_per_doc,
            seed=seed,
        )
        summary, flat, calibration = run_one(spec, args.val_fraction, args.test_fraction)
        rejection = summary.rejected / summary.total
        boosts.append(summary.accuracy_boost)
        rejections.append(rejection)
        summaries.append(summary)
        flats.append(100 * flat)
        lcns.append(100 * summary.overall_accuracy)
        proposeds.append(100 * summary.boosted_accuracy)
        print(
            f"{seed:>4} {summary.overall_accuracy:>9.4f} {summary.boosted_accuracy:>9.4f} "
            f"{summary.accuracy_boost:>10.2f} {rejection:>9.3f} {calibration.eer_gap:>9.4f}"
        )

    n = args.seeds
    print(
        f"\nmean over {n} seeds: boost={sum(boosts) / n:.2f}pp "
        f"rejection={sum(rejections) / n:.3f} "
        f"flat={sum(flats) / n:.1f}% lcn={sum(lcns) / n:.1f}% proposed={sum(proposeds) / n:.1f}%"
    )

    print()
    last = f"seed{n - 1}"
    print(
        render_report(
            [SummaryRow(last, summaries[-1])],
            [ComparisonRow(last, flat=flats[-1], lcn=lcns[-1], proposed=proposeds[-1])],
        ),
        end="",
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
