import math

import pytest
from hypothesis import given, settings, strategies as st

from conftest import run_pipeline
from routecat.centroid import CentroidModel, Mode, vocabulary_digest
from routecat.corpus import Document, SparseVector, Vocabulary, vectorize
from routecat.evaluation import SyntheticSpec, flat_predictions
from routecat.router import (
    ACCEPT_ALL,
    Calibration,
    CalibrationError,
    EerUndefinedError,
    build_calibration,
    calibrate_weights,
    check_matching_vocabulary,
    classify_with_reject,
    confidence_score,
    decode,
    dumps_calibration,
    eer_threshold,
    loads_calibration,
    reliability,
    with_threshold,
)
from routecat.taxonomy import TaxonomyError, parse_taxonomy


def vec(*pairs):
    return SparseVector(tuple(pairs))


def model_with_scores(taxonomy_text, centroids, vocab=None):
    """Hand-built model whose node scores are fully controlled by the test."""
    t = parse_taxonomy(taxonomy_text)
    if vocab is None:
        vocab = Vocabulary(index={}, doc_frequency={}, n_docs=1)
    full = {node: centroids.get(node, SparseVector()) for node in t.nodes if node != t.root}
    return CentroidModel(
        taxonomy=t, vocabulary=vocab, mode=Mode.POSITIVE_ONLY, policy=None, centroid_of=full
    )


def test_confidence_score_examples():
    assert confidence_score({"A": 0.6, "B": 0.3, "C": 0.1}, "A") == 0.6
    assert confidence_score({"X": 0.4}, "X") == 1.0
    assert confidence_score({"A": 0.0, "B": 0.0}, "A") == 0.5
    with pytest.raises(ValueError, match="not in its sibling group"):
        confidence_score({"A": 1.0}, "B")


def test_decode_worked_example(t0):
    model = model_with_scores(
        "ROOT\tA\nROOT\tB\nA\tA1\nA\tA2\nB\tB1\n",
        {"A": vec((0, 0.6)), "B": vec((0, 0.2)), "A1": vec((0, 0.5))},
    )
    trace = decode(model, vec((0, 1.0)))
    assert trace.route == ("A", "A1")
    assert [s.confidence for s in trace.steps] == [pytest.approx(0.75), pytest.approx(1.0)]
    assert trace.steps[0].group_scores == {"A": 0.6, "B": 0.2}
    assert trace.steps[1].group_scores == {"A1": 0.5, "A2": 0.0}
    assert [s.chosen for s in trace.steps] == list(trace.route)
    assert trace.reliability is None


def test_decode_zero_scores_fall_back_to_first_child():
    model = model_with_scores("R\ta\nR\tb\nR\tc\nR\td\n", {})
    trace = decode(model, vec((0, 1.0)))
    assert trace.route == ("a",)
    assert trace.steps[0].confidence == 0.25


def test_decode_depth_one_equals_flat_argmax():
    run = run_pipeline(SyntheticSpec(depth=1, branching=5, docs_per_leaf=20, noise_fraction=0.2, seed=3), 0.2, 0.3)
    flats = flat_predictions(run.split.train, run.split.test, run.taxonomy, run.vocab)
    for doc, flat_leaf in zip(run.split.test, flats):
        trace = decode(run.model, vectorize(doc, run.vocab))
        assert len(trace.route) == 1
        assert trace.route[-1] == flat_leaf


def test_decode_requires_children():
    from routecat.taxonomy import Taxonomy

    bare = CentroidModel(
        taxonomy=Taxonomy(root="R", parent_of={}, children_of={"R": ()}),
        vocabulary=Vocabulary(index={}, doc_frequency={}, n_docs=1),
        mode=Mode.POSITIVE_ONLY,
        policy=None,
        centroid_of={},
    )
    with pytest.raises(TaxonomyError, match="no children"):
        decode(bare, vec((0, 1.0)))


# vocabulary whose idf is positive for every term, so single-term documents
# vectorize to a unit coordinate vector
CAL_VOCAB = Vocabulary(
    index={"ta": 0, "tb": 1, "t1": 2, "t2": 3},
    doc_frequency={"ta": 1, "tb": 1, "t1": 1, "t2": 1},
    n_docs=2,
)

CAL_TAXONOMY = "ROOT\tA\nROOT\tB\nA\tA1\nA\tA2\nA1\tA1a\n"


def calibration_model():
    return model_with_scores(
        CAL_TAXONOMY,
        {
            "A": vec((0, 1.0)),
            "B": vec((1, 1.0)),
            "A1": vec((2, 1.0)),
            "A2": vec((3, 1.0)),
            "A1a": vec((2, 1.0)),
        },
        vocab=CAL_VOCAB,
    )


def test_calibrate_weights_examples():
    model = calibration_model()
    validation = [
        Document("v1", "A1", "ta t1"),
        Document("v2", "A1", "ta t1"),
        Document("v3", "A2", "ta t2"),
        Document("v4", "A1", "ta t2"),  # routed to A2 at depth 2: the one mistake
    ]
    weights = calibrate_weights(model, validation)
    assert weights[1] == 1.0
    assert weights[2] == 0.75
    assert weights[3] == 0.0  # nobody's true label reaches depth 3
    assert set(weights) == {1, 2, 3}


def test_calibrate_weights_empty():
    with pytest.raises(ValueError, match="empty validation set"):
        calibrate_weights(calibration_model(), [])


def test_reliability_examples():
    steps = decode(
        model_with_scores("R\ta\nR\tb\na\tc\na\td\n", {"a": vec((0, 0.6)), "c": vec((0, 0.5))}),
        vec((0, 1.0)),
    ).steps
    # confidences are (0.6/0.6, 0.5/0.5) = (1.0, 1.0); use crafted weights instead
    assert reliability(steps, {1: 1.0, 2: 0.8}) == pytest.approx(1.8)
    assert reliability(steps, {1: 0.0, 2: 0.0}) == 0.0
    with pytest.raises(CalibrationError, match="depth 2"):
        reliability(steps, {1: 1.0})


def test_reliability_weighted_sum():
    # weights (1.0, 0.8) against confidences (0.6, 0.5) -> 0.6 + 0.4 = 1.0
    from routecat.router import LevelStep

    steps = (
        LevelStep("x", {"x": 3.0, "y": 2.0}, 0.6),
        LevelStep("y", {"y": 1.0, "z": 1.0}, 0.5),
    )
    assert reliability(steps, {1: 1.0, 2: 0.8}) == pytest.approx(1.0)
    assert reliability((steps[0],), {1: 0.9}) == pytest.approx(0.9 * 0.6)


def test_eer_separated_groups():
    tau, gap = eer_threshold([(0.9, True), (0.8, True), (0.7, True), (0.4, False), (0.3, False)])
    assert tau == pytest.approx(0.55)
    assert gap == 0.0


def test_eer_fully_overlapping():
    tau, gap = eer_threshold([(0.6, True), (0.6, False)])
    assert tau == math.inf
    assert gap == 1.0


def test_eer_separable_pair():
    tau, gap = eer_threshold([(1.0, True), (0.0, False)])
    assert tau == pytest.approx(0.5)
    assert gap == 0.0


def test_eer_undefined():
    with pytest.raises(EerUndefinedError):
        eer_threshold([(0.5, True), (0.6, True)])
    with pytest.raises(EerUndefinedError):
        eer_threshold([(0.5, False)])


def _sweep_oracle(samples):
    """Exhaustive FA/FR sweep over observed scores, midpoints, and sentinels."""
    correct = [r for r, ok in samples if ok]
    incorrect = [r for r, ok in samples if not ok]
    distinct = sorted({r for r, _ in samples})
    candidates = (
        [float("-inf"), float("inf")]
        + distinct
        + [(a + b) / 2 for a, b in zip(distinct, distinct[1:])]
    )
    gaps = {}
    for tau in candidates:
        fa = sum(r >= tau for r in incorrect) / len(incorrect)
        fr = sum(r < tau for r in correct) / len(correct)
        gaps[tau] = abs(fa - fr)
    return gaps


@given(
    st.lists(
        st.tuples(st.floats(min_value=0.0, max_value=3.0), st.booleans()),
        min_size=2,
        max_size=80,
    )
)
@settings(max_examples=200)
def test_eer_matches_exhaustive_sweep(samples):
    if not any(ok for _, ok in samples) or all(ok for _, ok in samples):
        return
    tau, gap = eer_threshold(samples)
    gaps = _sweep_oracle(samples)
    assert gap == min(gaps.values())
    assert all(gaps[tau] <= g for g in gaps.values())


@given(
    st.dictionaries(
        st.sampled_from(["a", "b", "c", "d", "e"]),
        st.floats(min_value=0.0, max_value=10.0),
        min_size=1,
        max_size=5,
    )
)
def test_confidence_scores_sum_to_one(group):
    total = math.fsum(confidence_score(group, member) for member in group)
    assert total == pytest.approx(1.0, abs=1e-9)


@given(
    st.dictionaries(
        st.sampled_from(["a", "b", "c", "d"]),
        st.floats(min_value=0.0, max_value=10.0),
        min_size=1,
        max_size=4,
    ),
    st.floats(min_value=1e-6, max_value=1e6),
)
def test_confidence_argmax_invariant_under_scaling(group, factor):
    def argmax(scores):
        best = None
        for node, score in scores.items():
            if best is None or score > scores[best]:
                best = node
        return best

    scaled = {k: v * factor for k, v in group.items()}
    chosen = argmax(group)
    assert argmax(scaled) == chosen
    assert confidence_score(scaled, chosen) == pytest.approx(confidence_score(group, chosen), abs=1e-9)


def test_classify_accept_reject_boundary():
    model = model_with_scores("R\tA\nR\tB\n", {"A": vec((0, 0.9)), "B": vec((0, 0.1))})
    d = vec((0, 1.0))
    weights = {1: 1.0}

    accepted = classify_with_reject(model, Calibration(weights, 0.5, 0.0, 1), d)
    assert accepted.accepted and accepted.leaf == "A"
    assert accepted.reliability == pytest.approx(0.9)

    boundary = classify_with_reject(model, Calibration(weights, accepted.reliability, 0.0, 1), d)
    assert not boundary.accepted  # strictly-greater rule

    zero_weights = classify_with_reject(model, Calibration({1: 0.0}, ACCEPT_ALL, 0.0, 1), d)
    assert zero_weights.accepted
    assert zero_weights.reliability == 0.0


@given(st.lists(st.floats(min_value=0.0, max_value=2.0), min_size=1, max_size=20))
def test_raising_threshold_never_accepts_more(rels):
    taus = sorted({-math.inf, 0.0, 0.5, 1.0, math.inf} | set(rels))
    for lo, hi in zip(taus, taus[1:]):
        for rel in rels:
            if rel > hi:  # accepted at the higher threshold
                assert rel > lo  # must be accepted at the lower one too


def test_reliability_bounded_by_weight_sum():
    run = run_pipeline(SyntheticSpec(depth=3, branching=3, docs_per_leaf=10, noise_fraction=0.3, seed=5), 0.2, 0.2)
    weight_sum = math.fsum(run.calibration.level_weights.values())
    assert weight_sum <= run.taxonomy.max_depth
    for doc in run.split.test:
        decision = classify_with_reject(run.model, run.calibration, vectorize(doc, run.vocab))
        assert 0.0 <= decision.reliability <= weight_sum + 1e-9


def test_build_calibration_all_correct_accepts_everything():
    model = calibration_model()
    validation = [Document("v1", "A1", "ta t1"), Document("v2", "A2", "ta t2")]
    cal = build_calibration(model, validation)
    assert cal.source == "eer-all-correct"
    assert cal.threshold == -math.inf
    assert cal.validation_size == 2


def test_build_calibration_all_incorrect_rejects_everything():
    model = calibration_model()
    validation = [Document("v1", "A2", "ta t1"), Document("v2", "A1", "ta t2")]
    cal = build_calibration(model, validation)
    assert cal.source == "eer-all-incorrect"
    assert cal.threshold == math.inf


def test_build_calibration_manual_and_accept_all():
    model = calibration_model()
    validation = [Document("v1", "A1", "ta t1"), Document("v2", "A1", "ta t2")]
    manual = build_calibration(model, validation, threshold_override=0.5)
    assert manual.source == "manual" and manual.threshold == 0.5
    everything = build_calibration(model, validation, accept_all=True)
    assert everything.source == "accept-all" and everything.threshold == -math.inf


def test_calibration_round_trip():
    cal = Calibration(level_weights={1: 1.0, 2: 0.75}, threshold=-math.inf, eer_gap=0.25, validation_size=9, source="manual")
    text = dumps_calibration(cal, "abc123")
    loaded, digest = loads_calibration(text)
    assert loaded == cal
    assert digest == "abc123"
    assert dumps_calibration(loaded, digest) == text


def test_calibration_version_and_digest_checks(t0, t0_docs):
    from routecat.corpus import build_vocabulary
    from routecat.centroid import train

    text = dumps_calibration(Calibration({1: 1.0}, 0.5, 0.0, 3), "bogus")
    with pytest.raises(CalibrationError):
        loads_calibration(text.replace('"format_version":1', '"format_version":7'))
    model = train(t0_docs, t0, build_vocabulary(t0_docs))
    cal, digest = loads_calibration(text)
    with pytest.raises(CalibrationError, match="vocabulary mismatch"):
        check_matching_vocabulary(model, digest)
    check_matching_vocabulary(model, vocabulary_digest(model.vocabulary))


def test_with_threshold_replaces_only_threshold():
    cal = Calibration({1: 1.0}, 0.5, 0.1, 4)
    out = with_threshold(cal, 0.9, "manual")
    assert out.threshold == 0.9 and out.source == "manual"
    assert out.level_weights == cal.level_weights and out.eer_gap == cal.eer_gap
