"""Recall@K against the brute-force oracle, bias score, unified score."""

import numpy as np
import pytest

import oracles
from careval.embeddings import EmbeddingMatrix, from_rows
from careval.retrieval import (
    ORIENTATION_EQ1,
    ORIENTATION_TABLE3,
    RecallTable,
    eval_retrieval,
    rebias,
    unified_score,
)

# Published leaderboard recall rows used as bias-score references.
CLIP_B16 = {
    "spatial": ((45.6, 79.0, 89.2), (47.6, 80.9, 90.8)),
    "temporal": ((30.3, 65.1, 79.8), (35.8, 71.0, 85.8)),
    "bias": 17.75,
}
CLIP_L14 = {
    "spatial": ((49.0, 81.9, 91.4), (55.4, 85.6, 93.0)),
    "temporal": ((33.5, 70.3, 84.0), (39.7, 76.2, 87.9)),
    "bias": 16.52,
}
QWEN2_VL_7B = {
    "spatial": ((28.1, 61.3, 76.1), (31.6, 65.6, 80.4)),
    "temporal": ((24.3, 61.5, 78.4), (26.4, 59.2, 76.1)),
    "bias": 5.28,
}


def table(split, t2v, v2t) -> RecallTable:
    return RecallTable(
        split=split,
        t2v={1: t2v[0], 5: t2v[1], 10: t2v[2]},
        v2t={1: v2t[0], 5: v2t[1], 10: v2t[2]},
    )


def tables_for(row) -> tuple[RecallTable, RecallTable]:
    return (
        table("spatial", *row["spatial"]),
        table("temporal", *row["temporal"]),
    )


def oracle_table(text_emb, video_emb, ks):
    t2v = oracles.recall_at_k(
        text_emb.data.astype(np.float64).tolist(),
        video_emb.data.astype(np.float64).tolist(),
        list(text_emb.ids),
        list(video_emb.ids),
        ks,
    )
    v2t = oracles.recall_at_k(
        video_emb.data.astype(np.float64).tolist(),
        text_emb.data.astype(np.float64).tolist(),
        list(video_emb.ids),
        list(text_emb.ids),
        ks,
    )
    return t2v, v2t


class TestEvalRetrieval:
    def test_identity_embeddings_all_100(self):
        rng = np.random.default_rng(0)
        data = rng.standard_normal((12, 8)).astype(np.float32)
        ids = tuple(f"v{i}" for i in range(12))
        text = EmbeddingMatrix(ids=ids, data=data)
        video = EmbeddingMatrix(ids=ids, data=data)
        result = eval_retrieval(text, video, [1, 5, 10])
        assert all(value == 100.0 for value in result.t2v.values())
        assert all(value == 100.0 for value in result.v2t.values())

    def test_tie_fixture_matches_oracle(self):
        # Paired-in-order vectors with exact similarity ties: the oracle's
        # full sort with ascending-index tie-break is the reference.
        text = from_rows(["a", "b", "c"], [(0, 1), (0, 1), (1, 0)])
        video = from_rows(["a", "b", "c"], [(1, 0), (0, 1), (0, 1)])
        result = eval_retrieval(text, video, [1, 2, 3])
        t2v, v2t = oracle_table(text, video, [1, 2, 3])
        assert result.t2v == t2v
        assert result.v2t == v2t
        assert result.t2v[1] == pytest.approx(100.0 / 3.0)
        assert result.t2v[3] == 100.0
        assert result.v2t[1] == 0.0

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_oracle_random(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 64))
        d = int(rng.integers(2, 16))
        ids = tuple(f"v{i}" for i in range(n))
        text = EmbeddingMatrix(ids=ids, data=rng.standard_normal((n, d)).astype(np.float32))
        video = EmbeddingMatrix(ids=ids, data=rng.standard_normal((n, d)).astype(np.float32))
        ks = [1, min(5, n), n]
        ks = sorted(set(ks))
        result = eval_retrieval(text, video, ks)
        t2v, v2t = oracle_table(text, video, ks)
        assert result.t2v == t2v
        assert result.v2t == v2t

    def test_pairing_is_by_id_not_position(self):
        rng = np.random.default_rng(21)
        data = rng.standard_normal((6, 5)).astype(np.float32)
        ids = tuple(f"v{i}" for i in range(6))
        text = EmbeddingMatrix(ids=ids, data=data)
        shuffled = np.array([3, 0, 5, 1, 4, 2])
        video = EmbeddingMatrix(
            ids=tuple(ids[i] for i in shuffled), data=data[shuffled]
        )
        result = eval_retrieval(text, video, [1])
        assert result.t2v[1] == 100.0
        assert result.v2t[1] == 100.0

    def test_common_permutation_invariance(self):
        rng = np.random.default_rng(22)
        n, d = 16, 7
        ids = tuple(f"v{i}" for i in range(n))
        tdata = rng.standard_normal((n, d)).astype(np.float32)
        vdata = rng.standard_normal((n, d)).astype(np.float32)
        base = eval_retrieval(
            EmbeddingMatrix(ids=ids, data=tdata),
            EmbeddingMatrix(ids=ids, data=vdata),
            [1, 5, 10],
        )
        perm = rng.permutation(n)
        permuted = eval_retrieval(
            EmbeddingMatrix(ids=tuple(ids[i] for i in perm), data=tdata[perm]),
            EmbeddingMatrix(ids=tuple(ids[i] for i in perm), data=vdata[perm]),
            [1, 5, 10],
        )
        assert base.t2v == permuted.t2v
        assert base.v2t == permuted.v2t

    def test_scaling_leaves_recalls_unchanged(self):
        rng = np.random.default_rng(23)
        n, d = 10, 4
        ids = tuple(f"v{i}" for i in range(n))
        tdata = rng.standard_normal((n, d)).astype(np.float32)
        vdata = rng.standard_normal((n, d)).astype(np.float32)
        base = eval_retrieval(
            EmbeddingMatrix(ids=ids, data=tdata),
            EmbeddingMatrix(ids=ids, data=vdata),
            [1, 5],
        )
        scaled = eval_retrieval(
            EmbeddingMatrix(ids=ids, data=tdata * 37.5),
            EmbeddingMatrix(ids=ids, data=vdata),
            [1, 5],
        )
        assert base.t2v == scaled.t2v and base.v2t == scaled.v2t

    def test_monotone_and_full_recall_at_n(self):
        rng = np.random.default_rng(24)
        n = 20
        ids = tuple(f"v{i}" for i in range(n))
        text = EmbeddingMatrix(ids=ids, data=rng.standard_normal((n, 6)).astype(np.float32))
        video = EmbeddingMatrix(ids=ids, data=rng.standard_normal((n, 6)).astype(np.float32))
        result = eval_retrieval(text, video, [1, 5, 10, n])
        values = [result.t2v[k] for k in (1, 5, 10, n)]
        assert values == sorted(values)
        assert result.t2v[n] == 100.0

    def test_id_set_mismatch(self):
        text = from_rows(["a", "b"], [(1, 0), (0, 1)])
        video = from_rows(["a", "c"], [(1, 0), (0, 1)])
        with pytest.raises(ValueError, match="id sets differ"):
            eval_retrieval(text, video, [1])

    def test_k_larger_than_gallery(self):
        text = from_rows(["a", "b"], [(1, 0), (0, 1)])
        with pytest.raises(ValueError, match="K > gallery"):
            eval_retrieval(text, text, [1, 5])

    def test_unsorted_ks_rejected(self):
        text = from_rows(["a", "b"], [(1, 0), (0, 1)])
        with pytest.raises(ValueError, match="ascending"):
            eval_retrieval(text, text, [2, 1])


class TestRebias:
    @pytest.mark.parametrize("row", [CLIP_B16, CLIP_L14, QWEN2_VL_7B])
    def test_reproduces_published_column(self, row):
        spatial, temporal = tables_for(row)
        score = rebias(spatial, temporal)
        assert score.bias_percent == pytest.approx(row["bias"], abs=0.05)
        assert score.orientation == ORIENTATION_TABLE3

    def test_literal_orientation_differs(self):
        spatial, temporal = tables_for(CLIP_B16)
        score = rebias(spatial, temporal, ORIENTATION_EQ1)
        assert score.bias_percent == pytest.approx(15.08, abs=0.05)

    def test_identical_tables_zero_both_orientations(self):
        spatial, _ = tables_for(CLIP_B16)
        same = table("temporal", *CLIP_B16["spatial"])
        for orientation in (ORIENTATION_TABLE3, ORIENTATION_EQ1):
            assert rebias(spatial, same, orientation).bias_percent == 0.0

    def test_zero_denominator(self):
        spatial = table("spatial", (10, 20, 30), (10, 20, 30))
        temporal = table("temporal", (0, 0, 0), (0, 0, 0))
        with pytest.raises(ValueError, match="zero"):
            rebias(spatial, temporal, ORIENTATION_TABLE3)

    def test_means_are_six_value_means(self):
        spatial, temporal = tables_for(CLIP_B16)
        score = rebias(spatial, temporal)
        assert score.mean_spatial == pytest.approx(433.1 / 6, abs=1e-9)
        assert score.mean_temporal == pytest.approx(367.8 / 6, abs=1e-9)


class TestRecallTableInvariants:
    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of"):
            RecallTable(split="general", t2v={1: 101.0}, v2t={1: 0.0})

    def test_non_monotone_rejected(self):
        with pytest.raises(ValueError, match="monotone"):
            RecallTable(split="general", t2v={1: 50.0, 5: 40.0}, v2t={1: 0.0})


class TestUnifiedScore:
    @pytest.mark.parametrize(
        "r1,f1,expected",
        [(25.6, 26.8, 26.2), (17.6, 33.8, 25.7), (77.0, 28.2, 52.6), (78.0, 33.4, 55.7)],
    )
    def test_published_rows(self, r1, f1, expected):
        assert round(unified_score(r1, f1), 1) == expected

    def test_idempotent_on_equal_inputs(self):
        assert unified_score(41.3, 41.3) == 41.3

    def test_range_checked(self):
        with pytest.raises(ValueError):
            unified_score(-1.0, 50.0)
