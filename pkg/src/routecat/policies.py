"""Positive/negative training-set construction for each node's local classifier.

All six policies are defined over the documents' most specific labels.
Writing lam(c) for the documents labeled exactly c, below(c) for documents
labeled at a strict descendant of c, above(c) for documents labeled at a
strict ancestor of c, and sib(c)/sib_below(c) for documents labeled at a
sibling of c or a descendant of a sibling, the policies are:

    exclusive            T+ = lam(c)             T- = everything else
    less-exclusive       T+ = lam(c)             T- = all - lam(c) - below(c)
    less-inclusive       T+ = lam(c) + below(c)  T- = everything else
    inclusive            T+ = lam(c) + below(c)  T- = all - T+ - above(c)
    siblings             T+ = lam(c) + below(c)  T- = sib(c) + sib_below(c)
    exclusive-siblings   T+ = lam(c)             T- = sib(c)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from routecat.corpus import Document
from routecat.taxonomy import NodeId, Taxonomy


class PolicyKind(str, enum.Enum):
    EXCLUSIVE = "exclusive"
    LESS_EXCLUSIVE = "less-exclusive"
    LESS_INCLUSIVE = "less-inclusive"
    INCLUSIVE = "inclusive"
    SIBLINGS = "siblings"
    EXCLUSIVE_SIBLINGS = "exclusive-siblings"


@dataclass(frozen=True)
class NodeTrainingSet:
    node: NodeId
    positives: frozenset[str]
    negatives: frozenset[str]


def _check_node(t: Taxonomy, node: NodeId) -> None:
    if node not in t:
        raise ValueError(f"unknown node {node!r}")
    if node == t.root:
        raise ValueError("the root carries no classifier and has no training set")


def _ids_with_label_in(train: Sequence[Document], labels: frozenset[NodeId]) -> frozenset[str]:
    return frozenset(d.doc_id for d in train if d.label in labels)


def most_specific_examples(train: Sequence[Document], t: Taxonomy, node: NodeId) -> frozenset[str]:
    """Documents whose most specific label is exactly ``node`` (lam(c))."""
    _check_node(t, node)
    return frozenset(d.doc_id for d in train if d.label == node)


def build_training_set(
    train: Sequence[Document],
    t: Taxonomy,
    node: NodeId,
    policy: PolicyKind,
) -> NodeTrainingSet:
    """Positive and negative doc_id sets for ``node`` under ``policy``."""
    _check_node(t, node)
    everything = frozenset(d.doc_id for d in train)
    lam = most_specific_examples(train, t, node)
    below = _ids_with_label_in(train, t.descendants(node))
    sibling_nodes = t.siblings(node)
    sib_descendants = frozenset(
        d for s in sibling_nodes for d in t.descendants(s)
    )

    if policy is PolicyKind.EXCLUSIVE:
        positives = lam
        negatives = everything - positives
    elif policy is PolicyKind.LESS_EXCLUSIVE:
        positives = lam
        negatives = everything - lam - below
    elif policy is PolicyKind.LESS_INCLUSIVE:
        positives = lam | below
        negatives = everything - positives
    elif policy is PolicyKind.INCLUSIVE:
        positives = lam | below
        above = _ids_with_label_in(train, t.ancestors(node))
        negatives = everything - positives - above
    elif policy is PolicyKind.SIBLINGS:
        positives = lam | below
        negatives = _ids_with_label_in(train, sibling_nodes | sib_descendants)
    elif policy is PolicyKind.EXCLUSIVE_SIBLINGS:
        positives = lam
        negatives = _ids_with_label_in(train, sibling_nodes)
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unhandled policy {policy!r}")

    return NodeTrainingSet(node=node, positives=positives, negatives=negatives)


def positives_for_centroid(train: Sequence[Document], t: Taxonomy, node: NodeId) -> frozenset[str]:
    """Documents counted as members of ``node`` when averaging its centroid.

    Membership is read inclusively: a document belongs to its own label and
    to every ancestor of that label, so internal nodes average over their
    whole subtree.
    """
    _check_node(t, node)
    return most_specific_examples(train, t, node) | _ids_with_label_in(train, t.descendants(node))
