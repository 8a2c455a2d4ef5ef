"""Top-down route decoding, confidence scoring, calibration, and accept/reject.

Decoding walks the taxonomy from the root's children to a leaf, always
taking the highest-scoring node of the current sibling group (ties go to
the earlier child).  Each step's confidence is the chosen score divided by
the whole group's score mass.  A validation pass measures per-level
recognition rates, which weight the step confidences into a single
reliability value; documents are accepted only when reliability exceeds
the calibrated threshold.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from routecat.centroid import CentroidModel, node_score, vocabulary_digest
from routecat.corpus import Document, SparseVector, vectorize
from routecat.taxonomy import NodeId, Taxonomy, TaxonomyError

CALIBRATION_FORMAT = "routecat-calibration"
CALIBRATION_FORMAT_VERSION = 1

#: Threshold sentinel that accepts every document (reliability > -inf always).
ACCEPT_ALL = float("-inf")


class CalibrationError(Exception):
    """Calibration data missing, malformed, or inconsistent with the model."""


class EerUndefinedError(CalibrationError):
    """Equal error rate needs at least one correct and one incorrect sample."""


@dataclass(frozen=True)
class LevelStep:
    """One routing decision: the chosen node, its sibling group's scores, and its confidence."""

    chosen: NodeId
    group_scores: Mapping[NodeId, float]
    confidence: float


@dataclass(frozen=True)
class RouteTrace:
    """Decoded route with per-level steps; reliability is filled in once weights exist."""

    route: tuple[NodeId, ...]
    steps: tuple[LevelStep, ...]
    reliability: float | None = None


@dataclass(frozen=True)
class Calibration:
    """Per-depth weight factors plus the acceptance threshold.

    ``source`` records how the threshold was chosen: "eer" for a regular
    equal-error-rate sweep, "eer-all-correct"/"eer-all-incorrect" for the
    degenerate validation cases (accept everything / reject everything),
    "manual" for an explicit override, and "accept-all" for the -inf
    sentinel.
    """

    level_weights: Mapping[int, float]
    threshold: float
    eer_gap: float
    validation_size: int
    source: str = "eer"


@dataclass(frozen=True)
class Decision:
    """Accept/reject outcome for one document; the decoded leaf is kept either way."""

    accepted: bool
    leaf: NodeId
    reliability: float


def confidence_score(group_scores: Mapping[NodeId, float], chosen: NodeId) -> float:
    """Share of the sibling group's score mass held by ``chosen``.

    A zero-mass group falls back to the uniform value 1/|group| so the
    result is always in (0, 1].
    """
    if chosen not in group_scores:
        raise ValueError(f"chosen node {chosen!r} is not in its sibling group")
    total = math.fsum(group_scores.values())
    if total <= 0.0:
        return 1.0 / len(group_scores)
    return group_scores[chosen] / total


def decode(model: CentroidModel, d: SparseVector) -> RouteTrace:
    """Route a document vector from the root's children down to a leaf.

    Every step records the full sibling group's scores; prediction never
    stops early, so the route always ends at a leaf.
    """
    t = model.taxonomy
    group = t.children(t.root)
    if not group:
        raise TaxonomyError("taxonomy root has no children")
    route: list[NodeId] = []
    steps: list[LevelStep] = []
    while group:
        scores = {node: node_score(model, d, node) for node in group}
        chosen = group[0]
        best = scores[chosen]
        for node in group[1:]:
            if scores[node] > best:
                chosen, best = node, scores[node]
        route.append(chosen)
        steps.append(LevelStep(chosen=chosen, group_scores=scores, confidence=confidence_score(scores, chosen)))
        group = t.children(chosen)
    return RouteTrace(route=tuple(route), steps=tuple(steps))


def _decode_labeled(
    model: CentroidModel, docs: Sequence[Document]
) -> list[tuple[tuple[NodeId, ...], RouteTrace]]:
    """Decode labeled documents, pairing each trace with its true root path."""
    t = model.taxonomy
    out = []
    for doc in docs:
        out.append((t.path(doc.label), decode(model, vectorize(doc, model.vocabulary))))
    return out


def _weights_from_decoded(
    taxonomy: Taxonomy, decoded: Sequence[tuple[tuple[NodeId, ...], RouteTrace]]
) -> dict[int, float]:
    eligible = [0] * (taxonomy.max_depth + 1)
    correct = [0] * (taxonomy.max_depth + 1)
    for true_path, trace in decoded:
        for depth in range(1, len(true_path) + 1):
            eligible[depth] += 1
            if depth <= len(trace.route) and trace.route[depth - 1] == true_path[depth - 1]:
                correct[depth] += 1
    return {
        depth: (correct[depth] / eligible[depth] if eligible[depth] else 0.0)
        for depth in range(1, taxonomy.max_depth + 1)
    }


def calibrate_weights(model: CentroidModel, validation: Sequence[Document]) -> dict[int, float]:
    """Per-depth recognition rate on the validation set.

    weight(L) is the fraction of validation documents routed to the correct
    node at depth L, among documents whose true label sits at depth >= L.
    Depths nobody reaches get weight 0.
    """
    if not validation:
        raise ValueError("empty validation set")
    return _weights_from_decoded(model.taxonomy, _decode_labeled(model, validation))


def reliability(steps: Sequence[LevelStep], level_weights: Mapping[int, float]) -> float:
    """Weighted sum of step confidences along a decoded route."""
    total = 0.0
    for depth, step in enumerate(steps, start=1):
        if depth not in level_weights:
            raise CalibrationError(f"no weight calibrated for depth {depth}")
        total += level_weights[depth] * step.confidence
    return total


def eer_threshold(scores: Iterable[tuple[float, bool]]) -> tuple[float, float]:
    """Threshold equalizing false acceptances and false rejections.

    FA(t) is the fraction of incorrect samples with reliability >= t, FR(t)
    the fraction of correct samples with reliability < t.  Candidates are
    the midpoints between consecutive distinct reliabilities plus -inf/+inf
    sentinels; every achievable (FA, FR) operating point occurs at one of
    them.  Returns the candidate minimizing |FA - FR| (ties go to the larger
    threshold) together with the achieved gap.
    """
    correct = sorted(r for r, ok in scores if ok)
    incorrect = sorted(r for r, ok in scores if not ok)
    if not correct or not incorrect:
        raise EerUndefinedError(
            "EER needs both correct and incorrect validation samples"
        )
    distinct = sorted(set(correct) | set(incorrect))
    candidates = [float("-inf")]
    candidates.extend((a + b) / 2.0 for a, b in zip(distinct, distinct[1:]))
    candidates.append(float("inf"))

    best_tau = candidates[0]
    best_gap = math.inf
    for tau in candidates:
        fa = (len(incorrect) - bisect_left(incorrect, tau)) / len(incorrect)
        fr = bisect_left(correct, tau) / len(correct)
        gap = abs(fa - fr)
        if gap <= best_gap:
            best_tau, best_gap = tau, gap
    return best_tau, best_gap


def _fa_fr_gap(samples: Sequence[tuple[float, bool]], tau: float) -> float:
    """|FA - FR| at a fixed threshold; one-sided sample sets count the missing rate as 0."""
    correct = sorted(r for r, ok in samples if ok)
    incorrect = sorted(r for r, ok in samples if not ok)
    fa = (len(incorrect) - bisect_left(incorrect, tau)) / len(incorrect) if incorrect else 0.0
    fr = bisect_left(correct, tau) / len(correct) if correct else 0.0
    return abs(fa - fr)


def classify_with_reject(model: CentroidModel, calibration: Calibration, d: SparseVector) -> Decision:
    """Decode, score reliability, and accept only when strictly above the threshold."""
    trace = decode(model, d)
    rel = reliability(trace.steps, calibration.level_weights)
    return Decision(accepted=rel > calibration.threshold, leaf=trace.route[-1], reliability=rel)


def build_calibration(
    model: CentroidModel,
    validation: Sequence[Document],
    threshold_override: float | None = None,
    accept_all: bool = False,
) -> Calibration:
    """Run the full validation pass: level weights, then the threshold.

    The threshold comes from the EER sweep unless overridden.  When the
    validation set is entirely correct (or entirely incorrect) the EER is
    undefined and the calibration degrades gracefully to accept-everything
    (or reject-everything).
    """
    if not validation:
        raise ValueError("empty validation set")
    decoded = _decode_labeled(model, validation)
    weights = _weights_from_decoded(model.taxonomy, decoded)
    samples = []
    for true_path, trace in decoded:
        rel = reliability(trace.steps, weights)
        samples.append((rel, true_path[-1] in trace.route))

    if accept_all:
        threshold, source = ACCEPT_ALL, "accept-all"
        gap = _fa_fr_gap(samples, threshold)
    elif threshold_override is not None:
        threshold, source = threshold_override, "manual"
        gap = _fa_fr_gap(samples, threshold)
    else:
        try:
            threshold, gap = eer_threshold(samples)
            source = "eer"
        except EerUndefinedError:
            if all(ok for _, ok in samples):
                threshold, source = float("-inf"), "eer-all-correct"
            else:
                threshold, source = float("inf"), "eer-all-incorrect"
            gap = 0.0
    return Calibration(
        level_weights=weights,
        threshold=threshold,
        eer_gap=gap,
        validation_size=len(validation),
        source=source,
    )


def dumps_calibration(calibration: Calibration, vocab_digest: str) -> str:
    """Serialize calibration to canonical JSON, tagged with the model's vocabulary digest."""
    payload = {
        "format": CALIBRATION_FORMAT,
        "format_version": CALIBRATION_FORMAT_VERSION,
        "level_weights": {str(depth): w for depth, w in calibration.level_weights.items()},
        "threshold": calibration.threshold,
        "eer_gap": calibration.eer_gap,
        "validation_size": calibration.validation_size,
        "source": calibration.source,
        "vocabulary_digest": vocab_digest,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def loads_calibration(text: str) -> tuple[Calibration, str]:
    """Inverse of :func:`dumps_calibration`; returns the calibration and its digest."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CalibrationError(f"calibration file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CALIBRATION_FORMAT:
        raise CalibrationError("not a calibration file")
    if payload.get("format_version") != CALIBRATION_FORMAT_VERSION:
        raise CalibrationError(
            f"unsupported calibration format version {payload.get('format_version')!r}, "
            f"expected {CALIBRATION_FORMAT_VERSION}"
        )
    calibration = Calibration(
        level_weights={int(k): float(v) for k, v in payload["level_weights"].items()},
        threshold=float(payload["threshold"]),
        eer_gap=float(payload["eer_gap"]),
        validation_size=int(payload["validation_size"]),
        source=payload["source"],
    )
    return calibration, payload["vocabulary_digest"]


def check_matching_vocabulary(model: CentroidModel, calibration_digest: str) -> None:
    """Refuse model/calibration pairs that were not produced together."""
    if vocabulary_digest(model.vocabulary) != calibration_digest:
        raise CalibrationError(
            "vocabulary mismatch: the calibration was computed for a different model"
        )


def with_threshold(calibration: Calibration, threshold: float, source: str) -> Calibration:
    """Copy of a calibration with a replaced acceptance threshold."""
    return replace(calibration, threshold=threshold, source=source)
