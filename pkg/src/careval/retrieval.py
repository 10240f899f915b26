"""Recall@K retrieval evaluation, spatiotemporal retrieval-bias score, unified score.

Ranking rule: gallery items are ordered by descending cosine similarity,
ties broken by ascending gallery row index. Pairing between the text and
video sides is by id, never by row position. All arithmetic is double
precision; recalls are percentages in [0, 100].

The bias score supports two orientations:

* ``table3_compatible`` (default): ``100 * |mean_spatial / mean_temporal - 1|``.
  This is the orientation that reproduces published leaderboard values.
* ``eq1_literal``: ``100 * |1 - mean_temporal / mean_spatial|``.

The two differ whenever the split means differ; reports carry the
orientation used so numbers are never ambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingMatrix, similarity_matrix

SPLITS = ("general", "spatial", "temporal")
DEFAULT_KS = (1, 5, 10)

ORIENTATION_TABLE3 = "table3_compatible"
ORIENTATION_EQ1 = "eq1_literal"
ORIENTATIONS = (ORIENTATION_TABLE3, ORIENTATION_EQ1)

ORIENTATION_NOTE = (
    "bias orientation {orientation}: the ratio written as temporal over spatial "
    "does not reproduce published leaderboard values; spatial over temporal does. "
    "The default reports the leaderboard-compatible ratio; eq1_literal is the "
    "printed-formula variant."
)


@dataclass(frozen=True)
class RecallTable:
    """R@K for one caption split, both retrieval directions."""

    split: str
    t2v: dict[int, float]
    v2t: dict[int, float]

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        for direction in (self.t2v, self.v2t):
            ks = sorted(direction)
            for k in ks:
                value = direction[k]
                if not 0.0 <= value <= 100.0:
                    raise ValueError(f"recall out of [0, 100]: R@{k} = {value}")
            values = [direction[k] for k in ks]
            if any(b < a for a, b in zip(values, values[1:])):
                raise ValueError(f"recalls not monotone in K: {direction}")

    def mean_recall(self) -> float:
        """Arithmetic mean over every stored recall (both directions)."""
        values = list(self.t2v.values()) + list(self.v2t.values())
        return float(np.mean(values))


@dataclass(frozen=True)
class ReBiasScore:
    mean_spatial: float
    mean_temporal: float
    bias_percent: float
    orientation: str


def _ranks_of_pairs(sims: np.ndarray, paired_col: np.ndarray) -> np.ndarray:
    """1-based rank of each query's paired gallery item under the ranking rule.

    rank = #{gallery items with strictly higher similarity}
         + #{tied items at a lower gallery index} + 1
    which is exactly a descending full sort with ascending-index tie-break.
    """
    n_queries, n_gallery = sims.shape
    paired_sims = sims[np.arange(n_queries), paired_col][:, None]
    higher = (sims > paired_sims).sum(axis=1)
    col_index = np.arange(n_gallery)[None, :]
    tied_before = ((sims == paired_sims) & (col_index < paired_col[:, None])).sum(axis=1)
    return higher + tied_before + 1


def eval_retrieval(
    text_emb: EmbeddingMatrix,
    video_emb: EmbeddingMatrix,
    ks: Sequence[int] = DEFAULT_KS,
    split: str = "general",
) -> RecallTable:
    """Recall@K for text-to-video and video-to-text retrieval.

    Both matrices must carry the same id set; the item paired with a query
    is the one sharing its id.
    """
    ks = list(ks)
    if ks != sorted(ks) or len(set(ks)) != len(ks):
        raise ValueError("ks must be strictly ascending")
    if any(k < 1 for k in ks):
        raise ValueError("ks must be positive")
    text_ids, video_ids = set(text_emb.ids), set(video_emb.ids)
    if text_ids != video_ids:
        missing = sorted(text_ids ^ video_ids)
        raise ValueError(f"text/video id sets differ, e.g. {missing[:5]}")
    n = text_emb.n
    if any(k > n for k in ks):
        raise ValueError(f"K > gallery size {n}")

    sims = similarity_matrix(text_emb, video_emb).values
    video_pos = {vid: i for i, vid in enumerate(video_emb.ids)}
    text_pos = {tid: i for i, tid in enumerate(text_emb.ids)}
    t2v_pair = np.array([video_pos[tid] for tid in text_emb.ids])
    v2t_pair = np.array([text_pos[vid] for vid in video_emb.ids])

    t2v_ranks = _ranks_of_pairs(sims, t2v_pair)
    v2t_ranks = _ranks_of_pairs(sims.T, v2t_pair)

    t2v = {k: 100.0 * int((t2v_ranks <= k).sum()) / n for k in ks}
    v2t = {k: 100.0 * int((v2t_ranks <= k).sum()) / n for k in ks}
    return RecallTable(split=split, t2v=t2v, v2t=v2t)


def rebias(
    spatial: RecallTable,
    temporal: RecallTable,
    orientation: str = ORIENTATION_TABLE3,
) -> ReBiasScore:
    """Relative imbalance between spatial-split and temporal-split recall."""
    if orientation not in ORIENTATIONS:
        raise ValueError(f"unknown orientation {orientation!r}")
    for table, ks in ((spatial, DEFAULT_KS), (temporal, DEFAULT_KS)):
        for k in ks:
            if k not in table.t2v or k not in table.v2t:
                raise ValueError(f"{table.split} table is missing R@{k}")
    mean_spatial = float(
        np.mean([spatial.t2v[k] for k in DEFAULT_KS] + [spatial.v2t[k] for k in DEFAULT_KS])
    )
    mean_temporal = float(
        np.mean([temporal.t2v[k] for k in DEFAULT_KS] + [temporal.v2t[k] for k in DEFAULT_KS])
    )
    if orientation == ORIENTATION_TABLE3:
        if mean_temporal == 0.0:
            raise ValueError("mean temporal recall is zero; bias ratio undefined")
        bias = 100.0 * abs(mean_spatial / mean_temporal - 1.0)
    else:
        if mean_spatial == 0.0:
            raise ValueError("mean spatial recall is zero; bias ratio undefined")
        bias = 100.0 * abs(1.0 - mean_temporal / mean_spatial)
    return ReBiasScore(
        mean_spatial=mean_spatial,
        mean_temporal=mean_temporal,
        bias_percent=bias,
        orientation=orientation,
    )


def unified_score(avg_r1: float, avg_f1: float) -> float:
    """Arithmetic mean of average R@1 and average F1 (both percentages)."""
    for name, value in (("avg_r1", avg_r1), ("avg_f1", avg_f1)):
        if not 0.0 <= value <= 100.0:
            raise ValueError(f"{name} out of [0, 100]: {value}")
    return (avg_r1 + avg_f1) / 2.0
