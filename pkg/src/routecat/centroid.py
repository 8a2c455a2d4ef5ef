"""Per-node prototype vectors and inner-product scoring.

Each non-root taxonomy node gets one centroid: the plain (un-renormalized)
mean of the TF-IDF vectors of its member documents.  A node's score for a
document is the inner product with that centroid, optionally contrasted
against a negative centroid in binary mode.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from routecat.corpus import Document, SparseVector, Vocabulary, vectorize
from routecat.policies import PolicyKind, build_training_set, positives_for_centroid
from routecat.taxonomy import NodeId, Taxonomy, UnknownNodeError, format_taxonomy, parse_taxonomy

MODEL_FORMAT = "routecat-model"
MODEL_FORMAT_VERSION = 1


class ModelFormatError(Exception):
    """Model file is not readable by this version of the code."""


class Mode(str, enum.Enum):
    POSITIVE_ONLY = "positive-only"
    BINARY = "binary"


@dataclass(frozen=True)
class CentroidModel:
    """Trained centroids for every non-root node, plus the vector space.

    Nodes with no member documents map to the empty vector and score 0.
    The taxonomy travels with the model so a serialized model is
    self-contained for classification.
    """

    taxonomy: Taxonomy
    vocabulary: Vocabulary
    mode: Mode
    policy: PolicyKind | None
    centroid_of: Mapping[NodeId, SparseVector]
    negative_centroid_of: Mapping[NodeId, SparseVector] | None = None


def mean_vector(doc_ids: frozenset[str], vectors: Mapping[str, SparseVector]) -> SparseVector:
    """Coordinate-wise mean of the selected vectors.

    Each coordinate is summed with fsum (correctly rounded, so the result is
    independent of accumulation order) and divided by the member count;
    repeated runs produce bit-identical floats.
    """
    if not doc_ids:
        return SparseVector()
    acc: dict[int, list[float]] = {}
    for doc_id in sorted(doc_ids):
        for idx, w in vectors[doc_id].entries:
            acc.setdefault(idx, []).append(w)
    k = len(doc_ids)
    return SparseVector(tuple((idx, math.fsum(acc[idx]) / k) for idx in sorted(acc)))


def train(
    train_docs: Sequence[Document],
    taxonomy: Taxonomy,
    vocabulary: Vocabulary,
    mode: Mode = Mode.POSITIVE_ONLY,
    policy: PolicyKind | None = None,
) -> CentroidModel:
    """Build one centroid per non-root node.

    In positive-only mode a node averages every document labeled at the node
    or below it.  In binary mode the chosen policy supplies the positive set,
    and the mean of its negative set is stored alongside for contrastive
    scoring.
    """
    if not train_docs:
        raise ValueError("empty training set")
    if mode is Mode.BINARY and policy is None:
        raise ValueError("binary mode requires a training policy")
    vectors = {d.doc_id: vectorize(d, vocabulary) for d in train_docs}
    centroids: dict[NodeId, SparseVector] = {}
    negatives: dict[NodeId, SparseVector] = {}
    for node in taxonomy.nodes:
        if node == taxonomy.root:
            continue
        if mode is Mode.POSITIVE_ONLY:
            centroids[node] = mean_vector(positives_for_centroid(train_docs, taxonomy, node), vectors)
        else:
            ts = build_training_set(train_docs, taxonomy, node, policy)
            centroids[node] = mean_vector(ts.positives, vectors)
            negatives[node] = mean_vector(ts.negatives, vectors)
    return CentroidModel(
        taxonomy=taxonomy,
        vocabulary=vocabulary,
        mode=mode,
        policy=policy if mode is Mode.BINARY else None,
        centroid_of=centroids,
        negative_centroid_of=negatives if mode is Mode.BINARY else None,
    )


def similarity(a: SparseVector, b: SparseVector) -> float:
    """Inner product of two sparse vectors; 0.0 when either is empty."""
    return a.dot(b)


def node_score(model: CentroidModel, d: SparseVector, node: NodeId) -> float:
    """Unnormalized posterior of ``node`` for document vector ``d``.

    Binary mode subtracts the negative-centroid similarity and clamps at
    zero so downstream confidence ratios stay within [0, 1].
    """
    if node not in model.centroid_of:
        raise UnknownNodeError(f"no classifier for node {node!r}")
    score = similarity(d, model.centroid_of[node])
    if model.mode is Mode.BINARY:
        score = max(0.0, score - similarity(d, model.negative_centroid_of[node]))
    return score


def vocabulary_digest(vocab: Vocabulary) -> str:
    """Stable fingerprint of a vocabulary, used to pair model and calibration files."""
    h = hashlib.sha256()
    for term, idx in sorted(vocab.index.items(), key=lambda kv: kv[1]):
        h.update(f"{term}\t{idx}\t{vocab.doc_frequency[term]}\n".encode("utf-8"))
    h.update(str(vocab.n_docs).encode("utf-8"))
    return h.hexdigest()


def _entries_payload(vec: SparseVector) -> list[list]:
    return [[idx, w] for idx, w in vec.entries]


def dumps_model(model: CentroidModel) -> str:
    """Serialize a model to canonical JSON (stable key order, compact separators)."""
    vocab = model.vocabulary
    terms = sorted(vocab.index.items(), key=lambda kv: kv[1])
    payload = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "mode": model.mode.value,
        "policy": model.policy.value if model.policy is not None else None,
        "taxonomy": format_taxonomy(model.taxonomy),
        "vocabulary": {
            "n_docs": vocab.n_docs,
            "terms": [[term, idx, vocab.doc_frequency[term]] for term, idx in terms],
        },
        "vocabulary_digest": vocabulary_digest(vocab),
        "centroids": {node: _entries_payload(vec) for node, vec in model.centroid_of.items()},
        "negative_centroids": (
            {node: _entries_payload(vec) for node, vec in model.negative_centroid_of.items()}
            if model.negative_centroid_of is not None
            else None
        ),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def loads_model(text: str) -> CentroidModel:
    """Inverse of :func:`dumps_model`; rejects unknown formats and versions."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a model file")
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {payload.get('format_version')!r}, "
            f"expected {MODEL_FORMAT_VERSION}"
        )
    taxonomy = parse_taxonomy(payload["taxonomy"])
    vocab_payload = payload["vocabulary"]
    index = {term: idx for term, idx, _ in vocab_payload["terms"]}
    df = {term: n for term, _, n in vocab_payload["terms"]}
    vocabulary = Vocabulary(index=index, doc_frequency=df, n_docs=vocab_payload["n_docs"])

    def vectors(mapping: dict) -> dict[NodeId, SparseVector]:
        return {
            node: SparseVector(tuple((int(i), float(w)) for i, w in entries))
            for node, entries in mapping.items()
        }

    negative = payload.get("negative_centroids")
    return CentroidModel(
        taxonomy=taxonomy,
        vocabulary=vocabulary,
        mode=Mode(payload["mode"]),
        policy=PolicyKind(payload["policy"]) if payload.get("policy") else None,
        centroid_of=vectors(payload["centroids"]),
        negative_centroid_of=vectors(negative) if negative is not None else None,
    )
