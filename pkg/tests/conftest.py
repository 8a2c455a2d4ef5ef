"""Shared fixtures: the toy taxonomy, random instances, and a naive policy oracle."""

from __future__ import annotations

import random
from types import SimpleNamespace

import pytest

from routecat.centroid import train
from routecat.corpus import Document, build_vocabulary, load_corpus, split_corpus
from routecat.evaluation import SyntheticSpec, generate_synthetic
from routecat.policies import PolicyKind
from routecat.router import build_calibration
from routecat.taxonomy import Taxonomy, parse_taxonomy

T0_TEXT = "ROOT\tA\nROOT\tB\nA\tA1\nA\tA2\nB\tB1\n"


@pytest.fixture
def t0() -> Taxonomy:
    return parse_taxonomy(T0_TEXT)


@pytest.fixture
def t0_docs() -> list[Document]:
    return [
        Document("d1", "A1", "alpha one"),
        Document("d2", "A1", "alpha uno"),
        Document("d3", "A2", "alpha two"),
        Document("d4", "B1", "beta bee"),
    ]


def random_taxonomy(rng: random.Random, max_nodes: int = 20, max_depth: int = 4) -> Taxonomy:
    """Random tree as edge text, depth-capped, parsed through the real parser."""
    n = rng.randint(2, max_nodes)
    depth = {0: 0}
    lines = []
    for i in range(1, n):
        candidates = [j for j in range(i) if depth[j] < max_depth]
        p = rng.choice(candidates)
        depth[i] = depth[p] + 1
        lines.append(f"n{p}\tn{i}")
    return parse_taxonomy("\n".join(lines) + "\n")


def random_labeled_docs(rng: random.Random, t: Taxonomy, max_docs: int = 200) -> list[Document]:
    labels = [node for node in t.nodes if node != t.root]
    count = rng.randint(1, max_docs)
    return [
        Document(f"d{i}", rng.choice(labels), f"w{rng.randint(0, 20)} w{rng.randint(0, 20)}")
        for i in range(count)
    ]


def naive_training_set(train_docs, t: Taxonomy, node, policy: PolicyKind):
    """Independent oracle: evaluates each policy's membership predicate per document.

    Works directly off the parent map instead of the library's relation
    queries, so it cannot share bugs with them.
    """

    def chain_up(label):
        out = []
        while label != t.root:
            label = t.parent_of[label]
            out.append(label)
        return out

    node_parent = t.parent_of[node]
    positives, negatives = set(), set()
    for d in train_docs:
        lab = d.label
        ancestors_of_label = chain_up(lab)
        is_lam = lab == node
        is_below = node in ancestors_of_label
        is_above = lab in chain_up(node)
        is_sibling = lab != node and lab != t.root and t.parent_of.get(lab) == node_parent
        # walk up from the label; the first node sharing node's parent tells us
        # whether the label sits under node itself or under one of its siblings
        is_sibling_or_below = False
        for member in [lab] + ancestors_of_label:
            if member == t.root:
                break
            if t.parent_of.get(member) == node_parent:
                is_sibling_or_below = member != node
                break

        if policy is PolicyKind.EXCLUSIVE:
            pos, neg = is_lam, not is_lam
        elif policy is PolicyKind.LESS_EXCLUSIVE:
            pos, neg = is_lam, not (is_lam or is_below)
        elif policy is PolicyKind.LESS_INCLUSIVE:
            pos, neg = is_lam or is_below, not (is_lam or is_below)
        elif policy is PolicyKind.INCLUSIVE:
            pos, neg = is_lam or is_below, not (is_lam or is_below or is_above)
        elif policy is PolicyKind.SIBLINGS:
            pos, neg = is_lam or is_below, is_sibling_or_below
        else:
            assert policy is PolicyKind.EXCLUSIVE_SIBLINGS
            pos, neg = is_lam, is_sibling
        if pos:
            positives.add(d.doc_id)
        elif neg:
            negatives.add(d.doc_id)
    return frozenset(positives), frozenset(negatives)


def run_pipeline(spec: SyntheticSpec, val_fraction: float, test_fraction: float, split_seed=None):
    """Generate, split, train, and calibrate in one go for test scenarios."""
    taxonomy_text, corpus_text = generate_synthetic(spec)
    taxonomy = parse_taxonomy(taxonomy_text)
    docs = load_corpus(corpus_text, taxonomy)
    split = split_corpus(docs, val_fraction, test_fraction, spec.seed if split_seed is None else split_seed)
    vocab = build_vocabulary(split.train)
    model = train(split.train, taxonomy, vocab)
    calibration = build_calibration(model, split.validation)
    return SimpleNamespace(
        taxonomy=taxonomy, docs=docs, split=split, vocab=vocab, model=model, calibration=calibration
    )
