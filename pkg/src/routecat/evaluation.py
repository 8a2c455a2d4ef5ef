"""Accuracy and rejection metrics, the flat baseline, and synthetic corpora.

A document counts as correctly routed when its true label lies on the
decoded route, which reduces to exact leaf match for leaf-labeled
documents and to route coverage for documents labeled at internal nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from routecat.centroid import CentroidModel, mean_vector, similarity
from routecat.corpus import Document, Vocabulary, vectorize
from routecat.policies import most_specific_examples
from routecat.prng import SplitMix64
from routecat.router import Calibration, classify_with_reject
from routecat.taxonomy import NodeId, Taxonomy, parse_taxonomy


@dataclass(frozen=True)
class EvalSummary:
    """Counts and rates for one evaluation run.

    true_rejections are rejected documents that were routed to the wrong
    label; false_rejections were routed correctly but rejected anyway.
    boosted_accuracy is the accuracy over accepted documents only, and
    accuracy_boost is its gain over overall_accuracy in percentage points.
    """

    total: int
    accepted: int
    rejected: int
    true_rejections: int
    false_rejections: int
    correct_total: int
    correct_accepted: int
    overall_accuracy: float
    boosted_accuracy: float
    accuracy_boost: float


def summarize(outcomes: Iterable[tuple[bool, bool]]) -> EvalSummary:
    """Aggregate per-document (correct, accepted) pairs into an EvalSummary."""
    total = accepted = correct_total = correct_accepted = tr = fr = 0
    for correct, was_accepted in outcomes:
        total += 1
        correct_total += correct
        if was_accepted:
            accepted += 1
            correct_accepted += correct
        elif correct:
            fr += 1
        else:
            tr += 1
    if total == 0:
        raise ValueError("empty test set")
    overall = correct_total / total
    boosted = correct_accepted / accepted if accepted else 0.0
    return EvalSummary(
        total=total,
        accepted=accepted,
        rejected=total - accepted,
        true_rejections=tr,
        false_rejections=fr,
        correct_total=correct_total,
        correct_accepted=correct_accepted,
        overall_accuracy=overall,
        boosted_accuracy=boosted,
        accuracy_boost=100.0 * (boosted - overall),
    )


def evaluate(model: CentroidModel, calibration: Calibration, test: Sequence[Document]) -> EvalSummary:
    """Classify every test document with the reject option and tabulate the outcome."""
    if not test:
        raise ValueError("empty test set")
    t = model.taxonomy
    outcomes = []
    for doc in test:
        decision = classify_with_reject(model, calibration, vectorize(doc, model.vocabulary))
        correct = doc.label in t.path(decision.leaf)
        outcomes.append((correct, decision.accepted))
    return summarize(outcomes)


def flat_predictions(
    train: Sequence[Document],
    test: Sequence[Document],
    taxonomy: Taxonomy,
    vocabulary: Vocabulary,
) -> list[NodeId]:
    """Hierarchy-blind prediction: nearest leaf centroid over all leaves at once."""
    if not train:
        raise ValueError("empty training set")
    vectors = {d.doc_id: vectorize(d, vocabulary) for d in train}
    leaf_centroids = [
        (leaf, mean_vector(most_specific_examples(train, taxonomy, leaf), vectors))
        for leaf in taxonomy.leaves
    ]
    predictions = []
    for doc in test:
        vec = vectorize(doc, vocabulary)
        best_leaf, best_score = leaf_centroids[0][0], similarity(vec, leaf_centroids[0][1])
        for leaf, centroid in leaf_centroids[1:]:
            score = similarity(vec, centroid)
            if score > best_score:
                best_leaf, best_score = leaf, score
        predictions.append(best_leaf)
    return predictions


def flat_baseline(
    train: Sequence[Document],
    test: Sequence[Document],
    taxonomy: Taxonomy,
    vocabulary: Vocabulary,
) -> float:
    """Exact-label accuracy of the flat nearest-centroid classifier."""
    predictions = flat_predictions(train, test, taxonomy, vocabulary)
    return sum(p == doc.label for p, doc in zip(predictions, test)) / len(test)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the seeded synthetic benchmark generator.

    Every non-root node owns ``vocab_per_topic`` private terms, disjoint
    from every other node's.  A document of a leaf draws each signal token
    from one topic on the leaf's ancestor chain, picking the level with
    weight 2**(level - 1) so specific terms dominate the way they do in
    topical text; a ``noise_fraction`` share of tokens comes instead from a
    vocabulary shared by all classes.  Because ancestor terms are spread
    over whole subtrees, decisions near the root stay easier than decisions
    near the leaves.
    """

    depth: int
    branching: int
    docs_per_leaf: int
    vocab_per_topic: int = 30
    noise_vocab_size: int = 150
    noise_fraction: float = 0.0
    tokens_per_doc: int = 40
    seed: int = 0

    def validate(self) -> None:
        for name in ("depth", "branching", "docs_per_leaf", "vocab_per_topic", "noise_vocab_size", "tokens_per_doc"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.noise_fraction < 1.0:
            raise ValueError("noise_fraction must lie in [0, 1)")


def generate_synthetic(spec: SyntheticSpec) -> tuple[str, str]:
    """Build (taxonomy text, corpus text) fully determined by the spec's seed."""
    spec.validate()
    root = "root"
    taxonomy_lines: list[str] = []
    level = [root]
    node_index: dict[str, int] = {}
    for depth in range(1, spec.depth + 1):
        next_level: list[str] = []
        for parent in level:
            for j in range(spec.branching):
                child = f"c{j}" if parent == root else f"{parent}.{j}"
                taxonomy_lines.append(f"{parent}\t{child}")
                node_index[child] = len(node_index)
                next_level.append(child)
        level = next_level
    taxonomy_text = "\n".join(taxonomy_lines) + "\n"
    t = parse_taxonomy(taxonomy_text)

    def topic_terms(node: str) -> list[str]:
        idx = node_index[node]
        return [f"w{idx}x{j}" for j in range(spec.vocab_per_topic)]

    noise_terms = [f"z{j}" for j in range(spec.noise_vocab_size)]
    rng = SplitMix64(spec.seed)
    corpus_lines: list[str] = []
    counter = 0
    for leaf in t.leaves:
        chain = [topic_terms(node) for node in t.path(leaf)]
        # cumulative 2**(level-1) weights for picking which chain topic a token comes from
        cumulative: list[int] = []
        total = 0
        for level in range(len(chain)):
            total += 1 << level
            cumulative.append(total)
        for _ in range(spec.docs_per_leaf):
            tokens = []
            for _ in range(spec.tokens_per_doc):
                if rng.random() < spec.noise_fraction:
                    tokens.append(noise_terms[rng.randrange(len(noise_terms))])
                else:
                    pick = rng.randrange(total)
                    level = 0
                    while pick >= cumulative[level]:
                        level += 1
                    terms = chain[level]
                    tokens.append(terms[rng.randrange(len(terms))])
            corpus_lines.append(f"d{counter:06d}\t{leaf}\t{' '.join(tokens)}")
            counter += 1
    return taxonomy_text, "\n".join(corpus_lines) + "\n"


@dataclass(frozen=True)
class SummaryRow:
    problem: str
    summary: EvalSummary


@dataclass(frozen=True)
class ComparisonRow:
    """Recognition rates (percent) of the three compared methods on one problem."""

    problem: str
    flat: float
    lcn: float
    proposed: float


def summary_csv(rows: Sequence[SummaryRow]) -> str:
    """Machine-readable rejection summary; floats use shortest round-trip form."""
    lines = ["problem,rejected,TR,FR,accuracy_boost"]
    for row in rows:
        s = row.summary
        lines.append(
            f"{row.problem},{s.rejected},{s.true_rejections},{s.false_rejections},{s.accuracy_boost!r}"
        )
    return "\n".join(lines) + "\n"


def comparison_csv(rows: Sequence[ComparisonRow]) -> str:
    lines = ["problem,flat,LCN,proposed"]
    for row in rows:
        lines.append(f"{row.problem},{row.flat!r},{row.lcn!r},{row.proposed!r}")
    return "\n".join(lines) + "\n"


def render_report(summary_rows: Sequence[SummaryRow], comparison_rows: Sequence[ComparisonRow]) -> str:
    """Human-readable tables followed by their CSV equivalents.

    The comparison section is omitted when no baseline rows are supplied.
    """
    out: list[str] = []
    out.append("Rejection summary")
    header = f"{'problem':<16}{'total':>8}{'accepted':>10}{'rejected':>10}{'TR':>7}{'FR':>7}{'overall':>10}{'boosted':>10}{'boost(pp)':>11}"
    out.append(header)
    for row in summary_rows:
        s = row.summary
        out.append(
            f"{row.problem:<16}{s.total:>8}{s.accepted:>10}{s.rejected:>10}"
            f"{s.true_rejections:>7}{s.false_rejections:>7}"
            f"{s.overall_accuracy:>10.4f}{s.boosted_accuracy:>10.4f}{s.accuracy_boost:>11.2f}"
        )
    out.append("")
    out.append("summary.csv")
    out.append(summary_csv(summary_rows).rstrip("\n"))
    if comparison_rows:
        out.append("")
        out.append("Method comparison (recognition rate, %)")
        out.append(f"{'problem':<16}{'flat':>8}{'LCN':>8}{'proposed':>10}")
        for row in comparison_rows:
            out.append(f"{row.problem:<16}{row.flat:>8.1f}{row.lcn:>8.1f}{row.proposed:>10.1f}")
        out.append("")
        out.append("comparison.csv")
        out.append(comparison_csv(comparison_rows).rstrip("\n"))
    return "\n".join(out) + "\n"
