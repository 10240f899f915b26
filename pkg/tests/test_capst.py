"""CapST scoring: per-video fixtures with hand-enumerated mock-judge counts.

The expected values for the 6-video fixture corpus were derived by hand:
for every (video, aspect) the mock extraction and containment rules were
enumerated manually to integer counts, frozen below, and converted to
precision/recall/F1 with plain arithmetic. The pipeline must match exactly.
"""

import pytest

from careval.capst import (
    AspectAggregate,
    VideoCapstScore,
    aggregate,
    evaluate_predictions,
    f1,
    score_video,
)
from careval.corpus import CaptionSet, CorpusEntry, PredictionEntry
from careval.judge import JudgeConfig

MOCK = JudgeConfig(backend="mock")

# video -> aspect -> (n_pred, n_pred_entailed, n_gt, n_gt_entailed); None = skipped
HAND_COUNTS = {
    "v1": {"object": (4, 2, 2, 2), "event": (3, 2, 2, 2)},
    "v2": {"object": (3, 0, 2, 0), "event": (3, 1, 4, 2)},
    "v3": {"object": (3, 2, 3, 2), "event": (1, 1, 1, 1)},
    "v4": {"object": (1, 1, 1, 1), "event": None},
    "v5": {"object": (2, 1, 3, 1), "event": (1, 1, 2, 1)},
    "v6": {"object": (3, 1, 1, 1), "event": (2, 2, 2, 2)},
}

CATEGORY = {
    "v1": "personal care",
    "v2": "household activities",
    "v3": "socializing & relaxing",
    "v4": "socializing & relaxing",
    "v5": "sports & exercise",
    "v6": "household activities",
}


def prf(counts):
    n_pred, pred_hit, n_gt, gt_hit = counts
    precision = pred_hit / n_pred if n_pred else 0.0
    recall = gt_hit / n_gt
    f1_value = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1_value


def expected_mean(video_ids, aspect, index):
    values = [prf(HAND_COUNTS[vid][aspect])[index] for vid in sorted(video_ids)]
    return sum(values) / len(values)


class TestF1:
    @pytest.mark.parametrize(
        "p,r,expected",
        [(0.502, 0.291, 0.368), (0.511, 0.184, 0.271), (0.578, 0.218, 0.317)],
    )
    def test_published_cells(self, p, r, expected):
        assert f1(p, r) == pytest.approx(expected, abs=5e-4)

    def test_zero_precision(self):
        assert f1(0.0, 0.9) == 0.0

    def test_bounded_by_max(self):
        assert f1(0.3, 0.7) <= max(0.3, 0.7)

    def test_range_checked(self):
        with pytest.raises(ValueError):
            f1(1.2, 0.5)


class TestScoreVideo:
    def test_abcd_fixture(self, fixture_corpus, fixture_predictions):
        # v2: four ground-truth events, prediction entails exactly two of
        # them and extracts three elements of which one is entailed.
        entry = next(e for e in fixture_corpus if e.id == "v2")
        pred = next(p for p in fixture_predictions if p.id == "v2")
        score = score_video(entry.captions, pred, "event", MOCK)
        assert score.recall == pytest.approx(0.5, abs=1e-12)
        assert score.precision == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert score.f1 == pytest.approx(0.4, abs=1e-9)
        assert (score.n_pred_elements, score.n_gt_elements) == (3, 4)

    def test_identical_prediction_scores_one(self):
        captions = CaptionSet(
            general="a man cuts a melon on a board",
            spatial="a man with a red hat. a wooden board.",
            temporal="the man cuts the melon. then he wipes the board.",
        )
        pred = PredictionEntry(id="x", caption=captions.temporal)
        score = score_video(captions, pred, "event", MOCK)
        assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)

    def test_empty_prediction_extraction(self):
        captions = CaptionSet(
            general="g",
            spatial="a red ball. a tall tree.",
            temporal="the man cuts the melon",
        )
        pred = PredictionEntry(id="x", caption="...")
        score = score_video(captions, pred, "object", MOCK)
        assert score.n_pred_elements == 0
        assert score.precision == 0.0
        assert score.f1 == 0.0

    def test_empty_ground_truth_skips(self):
        captions = CaptionSet(
            general="g", spatial="a red ball", temporal="the kite covers the sky"
        )
        pred = PredictionEntry(id="x", caption="the kite covers the sky")
        assert score_video(captions, pred, "event", MOCK) is None

    @pytest.mark.parametrize("vid", sorted(HAND_COUNTS))
    @pytest.mark.parametrize("aspect", ["object", "event"])
    def test_fixture_counts(self, vid, aspect, fixture_corpus, fixture_predictions):
        entry = next(e for e in fixture_corpus if e.id == vid)
        pred = next(p for p in fixture_predictions if p.id == vid)
        counts = HAND_COUNTS[vid][aspect]
        score = score_video(entry.captions, pred, aspect, MOCK)
        if counts is None:
            assert score is None
            return
        precision, recall, f1_value = prf(counts)
        assert score.n_pred_elements == counts[0]
        assert score.n_gt_elements == counts[2]
        assert score.precision == pytest.approx(precision, abs=1e-12)
        assert score.recall == pytest.approx(recall, abs=1e-12)
        assert score.f1 == pytest.approx(f1_value, abs=1e-12)


def make_score(vid, aspect, p, r):
    return VideoCapstScore(
        video_id=vid,
        aspect=aspect,
        precision=p,
        recall=r,
        f1=f1(p, r),
        n_pred_elements=1,
        n_gt_elements=1,
    )


class TestAggregate:
    def corpus_of(self, mapping):
        return [
            CorpusEntry(
                id=vid,
                video_uri=f"{vid}.mp4",
                duration_s=1.0,
                category=category,
                subcategory="s",
                captions=CaptionSet(general="g", spatial="s", temporal="t"),
            )
            for vid, category in mapping.items()
        ]

    def test_category_mean(self):
        corpus = self.corpus_of({"a": "personal care", "b": "personal care"})
        scores = [
            make_score("a", "event", 0.2, 0.2),
            make_score("b", "event", 0.4, 0.4),
        ]
        report = aggregate(scores, corpus)
        assert report.per_category["personal care"]["action"].f1 == pytest.approx(
            0.3, abs=1e-12
        )

    def test_overall_is_macro_over_videos_not_categories(self):
        corpus = self.corpus_of(
            {"a": "personal care", "b": "sports & exercise", "c": "sports & exercise"}
        )
        scores = [
            make_score("a", "event", 0.2, 0.2),
            make_score("b", "event", 0.4, 0.4),
            make_score("c", "event", 0.6, 0.6),
        ]
        report = aggregate(scores, corpus)
        assert report.overall["action"].f1 == pytest.approx(0.4, abs=1e-12)

    def test_empty_scores_rejected(self):
        with pytest.raises(ValueError):
            aggregate([], [])

    def test_f1_consistent_with_stored_p_r(self, fixture_corpus, fixture_predictions):
        report = evaluate_predictions(fixture_corpus, fixture_predictions, MOCK)
        for group in list(report.per_category.values()) + [report.overall]:
            for stats in group.values():
                assert isinstance(stats, AspectAggregate)


@pytest.fixture(scope="module")
def report(fixture_corpus, fixture_predictions):
    return evaluate_predictions(fixture_corpus, fixture_predictions, MOCK)


class TestEndToEnd:
    def test_overall_object(self, report):
        stats = report.overall["object"]
        videos = list(HAND_COUNTS)
        assert stats.n_videos == 6
        assert stats.precision == pytest.approx(expected_mean(videos, "object", 0), abs=1e-12)
        assert stats.recall == pytest.approx(expected_mean(videos, "object", 1), abs=1e-12)
        assert stats.f1 == pytest.approx(expected_mean(videos, "object", 2), abs=1e-12)

    def test_overall_action(self, report):
        stats = report.overall["action"]
        videos = [vid for vid in HAND_COUNTS if HAND_COUNTS[vid]["event"] is not None]
        assert stats.n_videos == 5
        assert stats.precision == pytest.approx(expected_mean(videos, "event", 0), abs=1e-12)
        assert stats.recall == pytest.approx(expected_mean(videos, "event", 1), abs=1e-12)
        assert stats.f1 == pytest.approx(expected_mean(videos, "event", 2), abs=1e-12)

    @pytest.mark.parametrize(
        "category,aspect,role",
        [
            ("personal care", "object", "object"),
            ("personal care", "event", "action"),
            ("household activities", "object", "object"),
            ("household activities", "event", "action"),
            ("socializing & relaxing", "object", "object"),
            ("socializing & relaxing", "event", "action"),
            ("sports & exercise", "object", "object"),
            ("sports & exercise", "event", "action"),
        ],
    )
    def test_per_category(self, report, category, aspect, role):
        videos = [
            vid
            for vid in HAND_COUNTS
            if CATEGORY[vid] == category and HAND_COUNTS[vid][aspect] is not None
        ]
        stats = report.per_category[category][role]
        assert stats.n_videos == len(videos)
        assert stats.precision == pytest.approx(expected_mean(videos, aspect, 0), abs=1e-12)
        assert stats.recall == pytest.approx(expected_mean(videos, aspect, 1), abs=1e-12)
        assert stats.f1 == pytest.approx(expected_mean(videos, aspect, 2), abs=1e-12)

    def test_skip_recorded(self, report):
        assert report.skipped == [
            ("v4", "no event elements extracted from ground truth")
        ]
        assert report.judged_videos == 6

    def test_metadata_records_templates_and_cap(self, report):
        assert report.metadata["element_cap"] == 50
        assert report.metadata["judge_backend"] == "mock"
        assert set(report.metadata["template_ids"]) == {"object", "event", "entailment"}

    def test_pipeline_deterministic(self, fixture_corpus, fixture_predictions, report):
        again = evaluate_predictions(fixture_corpus, fixture_predictions, MOCK)
        assert again.per_category == report.per_category
        assert again.overall == report.overall
        assert again.skipped == report.skipped


class TestProperties:
    def test_permutation_invariance_of_elements(self):
        # precision/recall only count entailments, so element order is moot
        captions = CaptionSet(
            general="g",
            spatial="a red hat. a green scarf. a blue coat.",
            temporal="t",
        )
        forward = PredictionEntry(id="x", caption="a red hat. a green scarf.")
        backward = PredictionEntry(id="x", caption="a green scarf. a red hat.")
        s1 = score_video(captions, forward, "object", MOCK)
        s2 = score_video(captions, backward, "object", MOCK)
        assert (s1.precision, s1.recall) == (s2.precision, s2.recall)

    def test_adding_entailed_element_moves_precision_counts(self):
        captions = CaptionSet(
            general="g",
            spatial="a red hat. a green scarf.",
            temporal="t",
        )
        base = PredictionEntry(id="x", caption="a red hat. a purple sofa.")
        extended = PredictionEntry(
            id="x", caption="a red hat. a purple sofa. a green scarf."
        )
        s_base = score_video(captions, base, "object", MOCK)
        s_ext = score_video(captions, extended, "object", MOCK)
        assert s_ext.n_pred_elements == s_base.n_pred_elements + 1
        base_hits = round(s_base.precision * s_base.n_pred_elements)
        ext_hits = round(s_ext.precision * s_ext.n_pred_elements)
        assert ext_hits == base_hits + 1
