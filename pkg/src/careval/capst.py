"""Caption scoring: per-video precision/recall/F1 over judged elements.

For one video and one aspect (``object`` against the spatial ground-truth
caption, ``event`` against the temporal one):

* ground-truth elements are extracted from the aspect caption, predicted
  elements from the model caption, both with the same aspect template;
* precision = (# predicted elements entailed by the ground-truth aspect
  caption) / |predicted elements|;
* recall = (# ground-truth elements entailed by the predicted caption)
  / |ground-truth elements|;
* F1 is the harmonic mean.

Both denominators are element counts. Videos whose ground-truth caption
yields no elements for an aspect are skipped for that aspect and listed in
the report rather than scored as zero.

Aggregation is macro over videos: the overall row is the mean over all
scored videos, not the mean of category means. Table cells downstream
follow the ``F1/Recall/Precision`` convention with the ``event`` aspect
reported under the ``action`` heading.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import CaptionSet, CorpusEntry, PredictionEntry
from .judge import (
    BACKEND_HTTP,
    JudgeClient,
    JudgeConfig,
    extract_elements,
    judge_entailment,
    run_bounded,
)
from .judge import templates as _templates

ASPECTS = ("object", "event")
ROLE_BY_ASPECT = {"object": "object", "event": "action"}
DENOMINATOR_NOTE = (
    "precision/recall normalize by element counts (|pred elements| and "
    "|ground-truth elements| respectively)"
)


@dataclass(frozen=True)
class VideoCapstScore:
    video_id: str
    aspect: str
    precision: float
    recall: float
    f1: float
    n_pred_elements: int
    n_gt_elements: int
    pred_truncated: bool = False
    gt_truncated: bool = False


@dataclass(frozen=True)
class AspectAggregate:
    f1: float
    recall: float
    precision: float
    n_videos: int


@dataclass
class CapstReport:
    per_category: dict[str, dict[str, AspectAggregate]]
    overall: dict[str, AspectAggregate]
    judged_videos: int
    skipped: list[tuple[str, str]]
    metadata: dict = field(default_factory=dict)


def f1(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    for name, value in (("precision", p), ("recall", r)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} out of [0, 1]: {value}")
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def _aspect_caption(gt: CaptionSet, aspect: str) -> str:
    if aspect == "object":
        return gt.spatial
    if aspect == "event":
        return gt.temporal
    raise ValueError(f"unknown aspect {aspect!r}")


def score_video(
    gt: CaptionSet,
    pred: PredictionEntry,
    aspect: str,
    config: JudgeConfig,
    client: JudgeClient | None = None,
) -> VideoCapstScore | None:
    """Score one prediction for one aspect; None when the ground truth has
    no extractable elements (the caller records the skip)."""
    gt_caption = _aspect_caption(gt, aspect)
    gt_extraction = extract_elements(gt_caption, aspect, config, client)
    if not gt_extraction.elements:
        return None
    pred_extraction = extract_elements(pred.caption, aspect, config, client)

    entailed_gt = sum(
        judge_entailment(pred.caption, element, config, client).entailed
        for element in gt_extraction.elements
    )
    recall = entailed_gt / len(gt_extraction.elements)

    if pred_extraction.elements:
        entailed_pred = sum(
            judge_entailment(gt_caption, element, config, client).entailed
            for element in pred_extraction.elements
        )
        precision = entailed_pred / len(pred_extraction.elements)
    else:
        precision = 0.0

    return VideoCapstScore(
        video_id=pred.id,
        aspect=aspect,
        precision=precision,
        recall=recall,
        f1=f1(precision, recall),
        n_pred_elements=len(pred_extraction.elements),
        n_gt_elements=len(gt_extraction.elements),
        pred_truncated=pred_extraction.truncated,
        gt_truncated=gt_extraction.truncated,
    )


def _mean_aggregate(scores: list[VideoCapstScore]) -> AspectAggregate:
    n = len(scores)
    return AspectAggregate(
        f1=sum(s.f1 for s in scores) / n,
        recall=sum(s.recall for s in scores) / n,
        precision=sum(s.precision for s in scores) / n,
        n_videos=n,
    )


def aggregate(
    scores: list[VideoCapstScore], corpus: list[CorpusEntry]
) -> CapstReport:
    """Macro-average scores per category and overall (mean over videos)."""
    if not scores:
        raise ValueError("no scores to aggregate")
    category_of = {entry.id: entry.category for entry in corpus}
    unknown = [s.video_id for s in scores if s.video_id not in category_of]
    if unknown:
        raise ValueError(f"scores reference ids missing from corpus: {unknown[:5]}")

    by_category: dict[str, dict[str, list[VideoCapstScore]]] = {}
    by_role: dict[str, list[VideoCapstScore]] = {}
    for score in sorted(scores, key=lambda s: (s.video_id, s.aspect)):
        role = ROLE_BY_ASPECT[score.aspect]
        category = category_of[score.video_id]
        by_category.setdefault(category, {}).setdefault(role, []).append(score)
        by_role.setdefault(role, []).append(score)

    per_category = {
        category: {role: _mean_aggregate(group) for role, group in sorted(roles.items())}
        for category, roles in sorted(by_category.items())
    }
    overall = {role: _mean_aggregate(group) for role, group in sorted(by_role.items())}
    judged = len({s.video_id for s in scores})
    return CapstReport(
        per_category=per_category,
        overall=overall,
        judged_videos=judged,
        skipped=[],
        metadata={"denominators": DENOMINATOR_NOTE},
    )


def evaluate_predictions(
    corpus: list[CorpusEntry],
    predictions: list[PredictionEntry],
    config: JudgeConfig,
    aspects: tuple[str, ...] = ASPECTS,
) -> CapstReport:
    """Score every prediction for every aspect and aggregate.

    Scoring tasks run through the bounded dispatcher; results and skip lists
    are ordered by video id, so the report is deterministic regardless of
    completion order.
    """
    for aspect in aspects:
        if aspect not in ASPECTS:
            raise ValueError(f"unknown aspect {aspect!r}")
    entries = {entry.id: entry for entry in corpus}
    missing = [p.id for p in predictions if p.id not in entries]
    if missing:
        raise ValueError(f"prediction ids missing from corpus: {missing[:5]}")

    client = JudgeClient(config) if config.backend == BACKEND_HTTP else None
    ordered = sorted(predictions, key=lambda p: p.id)
    jobs = [(pred, aspect) for pred in ordered for aspect in aspects]
    tasks = [
        (
            lambda pred=pred, aspect=aspect: score_video(
                entries[pred.id].captions, pred, aspect, config, client
            )
        )
        for pred, aspect in jobs
    ]
    results = run_bounded(tasks, config.max_in_flight)

    scores: list[VideoCapstScore] = []
    skipped: list[tuple[str, str]] = []
    truncated: list[dict] = []
    for (pred, aspect), result in zip(jobs, results):
        if result is None:
            skipped.append(
                (pred.id, f"no {aspect} elements extracted from ground truth")
            )
            continue
        scores.append(result)
        if result.pred_truncated or result.gt_truncated:
            truncated.append(
                {
                    "video_id": result.video_id,
                    "aspect": aspect,
                    "pred_truncated": result.pred_truncated,
                    "gt_truncated": result.gt_truncated,
                }
            )

    report = aggregate(scores, corpus) if scores else CapstReport(
        per_category={}, overall={}, judged_videos=0, skipped=[], metadata={}
    )
    report.skipped = skipped
    report.metadata = {
        "judge_backend": config.backend,
        "judge_model": config.model_name,
        "element_cap": config.element_cap,
        "template_ids": {
            "object": _templates.OBJECT_EXTRACT_TEMPLATE_ID,
            "event": _templates.EVENT_EXTRACT_TEMPLATE_ID,
            "entailment": _templates.ENTAILMENT_TEMPLATE_ID,
        },
        "denominators": DENOMINATOR_NOTE,
        "truncated": truncated,
    }
    return report
