"""Labeled documents, TF-IDF sparse vectors, and deterministic corpus splits.

Corpus files are UTF-8 with one ``doc_id<TAB>label<TAB>text`` line per
document; ``#`` lines and blank lines are ignored.  Every document carries
exactly one label: the most specific category it belongs to, which may be
an internal node of the taxonomy.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

from routecat.prng import SplitMix64
from routecat.taxonomy import NodeId, Taxonomy

# maximal runs of Unicode alphanumerics; underscore is not a word character here
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


class CorpusError(Exception):
    """Malformed corpus input."""


@dataclass(frozen=True)
class Document:
    doc_id: str
    label: NodeId
    text: str


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop tokens shorter than 2.

    No stemming and no stopword removal, so the same bytes always produce
    the same token sequence.
    """
    return [t for t in _TOKEN.findall(text.lower()) if len(t) >= 2]


@dataclass(frozen=True)
class Vocabulary:
    """Term index built from training documents only.

    ``index`` maps each term to a contiguous id in first-appearance order;
    ``doc_frequency`` counts the training documents containing the term.
    """

    index: Mapping[str, int]
    doc_frequency: Mapping[str, int]
    n_docs: int

    def __len__(self) -> int:
        return len(self.index)

    def idf(self, term: str) -> float:
        """Smoothed inverse document frequency ln((N + 1) / (df + 1))."""
        return math.log((self.n_docs + 1) / (self.doc_frequency[term] + 1))


def build_vocabulary(train: Sequence[Document]) -> Vocabulary:
    """Index every distinct training token; ids follow first appearance."""
    if not train:
        raise ValueError("cannot build a vocabulary from an empty training set")
    index: dict[str, int] = {}
    df: dict[str, int] = {}
    for doc in train:
        tokens = tokenize(doc.text)
        for term in tokens:
            if term not in index:
                index[term] = len(index)
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    return Vocabulary(index=index, doc_frequency=df, n_docs=len(train))


@dataclass(frozen=True)
class SparseVector:
    """Sparse nonnegative vector as (index, weight) pairs sorted by index."""

    entries: tuple[tuple[int, float], ...] = ()

    @cached_property
    def _lookup(self) -> dict[int, float]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def norm(self) -> float:
        return math.sqrt(math.fsum(w * w for _, w in self.entries))

    def dot(self, other: SparseVector) -> float:
        """Inner product over matching indices.

        fsum makes the result independent of which operand drives the loop.
        """
        small, big = (self, other) if len(self.entries) <= len(other.entries) else (other, self)
        lookup = big._lookup
        return math.fsum(w * lookup[i] for i, w in small.entries if i in lookup)

    def scaled(self, factor: float) -> SparseVector:
        return SparseVector(tuple((i, w * factor) for i, w in self.entries))


def vectorize(doc: Document, vocab: Vocabulary) -> SparseVector:
    """TF-IDF vector of a document, L2-normalized.

    Out-of-vocabulary terms are dropped, as are terms whose idf is zero
    (terms present in every training document), so the result may be empty.
    """
    counts = Counter(t for t in tokenize(doc.text) if t in vocab.index)
    weights: dict[int, float] = {}
    for term, tf in counts.items():
        w = tf * vocab.idf(term)
        if w > 0.0:
            weights[vocab.index[term]] = w
    if not weights:
        return SparseVector()
    norm = math.sqrt(math.fsum(w * w for w in (weights[i] for i in sorted(weights))))
    return SparseVector(tuple((i, weights[i] / norm) for i in sorted(weights)))


@dataclass(frozen=True)
class CorpusSplit:
    train: tuple[Document, ...]
    validation: tuple[Document, ...]
    test: tuple[Document, ...]


def load_corpus(text: str, taxonomy: Taxonomy) -> list[Document]:
    """Parse corpus lines in file order, validating labels against the taxonomy."""
    docs: list[Document] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3 or not parts[0] or not parts[1]:
            raise CorpusError(f"line {lineno}: expected doc_id<TAB>label<TAB>text, got {line!r}")
        doc_id, label, body = parts
        if doc_id in seen:
            raise CorpusError(f"line {lineno}: duplicate doc_id {doc_id!r}")
        if label not in taxonomy:
            raise CorpusError(f"line {lineno}: unknown label {label!r}")
        if label == taxonomy.root:
            raise CorpusError(f"line {lineno}: label is the taxonomy root")
        seen.add(doc_id)
        docs.append(Document(doc_id=doc_id, label=label, text=body))
    return docs


def split_corpus(
    docs: Sequence[Document],
    val_fraction: float,
    test_fraction: float,
    seed: int,
) -> CorpusSplit:
    """Shuffle deterministically under ``seed`` and partition by fractions.

    Validation and test sizes are floor(fraction * n); the remainder trains.
    The shuffle is the fixed splitmix64 Fisher-Yates from :mod:`routecat.prng`,
    so the same inputs give byte-identical partitions on every platform.
    """
    if not (0.0 <= val_fraction < 1.0 and 0.0 <= test_fraction < 1.0):
        raise ValueError("fractions must lie in [0, 1)")
    if val_fraction + test_fraction >= 1.0:
        raise ValueError("val_fraction + test_fraction must be < 1")
    order = list(docs)
    SplitMix64(seed).shuffle(order)
    n_val = int(val_fraction * len(order))
    n_test = int(test_fraction * len(order))
    return CorpusSplit(
        validation=tuple(order[:n_val]),
        test=tuple(order[n_val : n_val + n_test]),
        train=tuple(order[n_val + n_test :]),
    )
