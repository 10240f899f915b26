"""Corpus data model, JSONL ingestion, and structural validation.

File formats (both UTF-8, one JSON object per line):

* corpus file::

    {"id": ..., "video_uri": ..., "duration_s": ..., "category": ...,
     "subcategory": ..., "captions": {"general": ..., "spatial": ..., "temporal": ...}}

* prediction file::

    {"id": ..., "caption": ...}

Validation codes (the fixed enumeration used in ``ValidationReport``):

* errors:   ``EMPTY_ID``, ``EMPTY_CAPTION``, ``NEGATIVE_DURATION``
* warnings: ``WORD_COUNT_LOW``, ``WORD_COUNT_HIGH``, ``UNKNOWN_CATEGORY``

A word is a maximal run of non-whitespace characters; the same rule is
used everywhere word counts appear.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

# The four major category labels found in released corpora. Unknown
# labels are a warning, not an error, so ad-hoc corpora still load.
MAJOR_CATEGORIES = (
    "personal care",
    "socializing & relaxing",
    "sports & exercise",
    "household activities",
)

# General-caption word-count band checked by validate_entry.
WORD_COUNT_RANGE = (150, 300)

ERROR_CODES = ("EMPTY_ID", "EMPTY_CAPTION", "NEGATIVE_DURATION")
WARNING_CODES = ("WORD_COUNT_LOW", "WORD_COUNT_HIGH", "UNKNOWN_CATEGORY")


class CorpusFormatError(ValueError):
    """Raised when a corpus or prediction file violates the line schema."""


@dataclass(frozen=True)
class CaptionSet:
    """The three annotation layers attached to one video."""

    general: str
    spatial: str
    temporal: str


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    video_uri: str
    duration_s: float
    category: str
    subcategory: str
    captions: CaptionSet


@dataclass(frozen=True)
class PredictionEntry:
    id: str
    caption: str


@dataclass(frozen=True)
class ValidationReport:
    entry_id: str
    errors: tuple[str, ...]
    warnings: tuple[str, ...]
    word_count_general: int

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass
class CorpusStats:
    count: int
    mean_words: float
    mean_duration_s: float
    per_category: dict[str, int]


def word_count(text: str) -> int:
    """Count maximal non-whitespace runs."""
    return len(text.split())


def _require(record: dict, key: str, line_no: int, path: Path) -> object:
    if key not in record:
        raise CorpusFormatError(f"{path}:{line_no}: missing field {key!r}")
    return record[key]


def _entry_from_record(record: dict, line_no: int, path: Path) -> CorpusEntry:
    if not isinstance(record, dict):
        raise CorpusFormatError(f"{path}:{line_no}: record is not an object")
    entry_id = _require(record, "id", line_no, path)
    if not isinstance(entry_id, str) or not entry_id:
        raise CorpusFormatError(f"{path}:{line_no}: id must be a non-empty string")
    duration = _require(record, "duration_s", line_no, path)
    if not isinstance(duration, (int, float)) or isinstance(duration, bool):
        raise CorpusFormatError(f"{path}:{line_no}: duration_s must be a number")
    captions_obj = _require(record, "captions", line_no, path)
    if not isinstance(captions_obj, dict):
        raise CorpusFormatError(f"{path}:{line_no}: captions must be an object")
    caption_fields = {}
    for name in ("general", "spatial", "temporal"):
        value = captions_obj.get(name)
        if value is None:
            raise CorpusFormatError(
                f"{path}:{line_no}: missing caption field {name!r}"
            )
        if not isinstance(value, str):
            raise CorpusFormatError(
                f"{path}:{line_no}: caption {name!r} must be a string"
            )
        caption_fields[name] = value
    for name in ("video_uri", "category", "subcategory"):
        value = _require(record, name, line_no, path)
        if not isinstance(value, str):
            raise CorpusFormatError(f"{path}:{line_no}: {name} must be a string")
    return CorpusEntry(
        id=entry_id,
        video_uri=record["video_uri"],
        duration_s=float(duration),
        category=record["category"],
        subcategory=record["subcategory"],
        captions=CaptionSet(**caption_fields),
    )


def _iter_json_lines(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(
                    f"{path}:{line_no}: malformed JSON: {exc.msg}"
                ) from exc


def load_corpus(path: str | Path) -> list[CorpusEntry]:
    """Load a corpus file, preserving record order and rejecting duplicate ids."""
    path = Path(path)
    entries: list[CorpusEntry] = []
    seen: dict[str, int] = {}
    for line_no, record in _iter_json_lines(path):
        entry = _entry_from_record(record, line_no, path)
        if entry.id in seen:
            raise CorpusFormatError(
                f"{path}:{line_no}: duplicate id {entry.id!r}"
                f" (first seen on line {seen[entry.id]})"
            )
        seen[entry.id] = line_no
        entries.append(entry)
    return entries


def save_corpus(entries: Iterable[CorpusEntry], path: str | Path) -> None:
    """Serialize entries back to the corpus line format (stable key order)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as handle:
        for entry in entries:
            record = {
                "id": entry.id,
                "video_uri": entry.video_uri,
                "duration_s": entry.duration_s,
                "category": entry.category,
                "subcategory": entry.subcategory,
                "captions": {
                    "general": entry.captions.general,
                    "spatial": entry.captions.spatial,
                    "temporal": entry.captions.temporal,
                },
            }
            handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            handle.write("\n")


def load_predictions(
    path: str | Path, corpus: Iterable[CorpusEntry] | None = None
) -> list[PredictionEntry]:
    """Load a prediction file. When ``corpus`` is given, every prediction id
    must resolve to a corpus entry."""
    path = Path(path)
    predictions: list[PredictionEntry] = []
    seen: dict[str, int] = {}
    for line_no, record in _iter_json_lines(path):
        if not isinstance(record, dict):
            raise CorpusFormatError(f"{path}:{line_no}: record is not an object")
        entry_id = _require(record, "id", line_no, path)
        caption = _require(record, "caption", line_no, path)
        if not isinstance(entry_id, str) or not entry_id:
            raise CorpusFormatError(f"{path}:{line_no}: id must be a non-empty string")
        if not isinstance(caption, str):
            raise CorpusFormatError(f"{path}:{line_no}: caption must be a string")
        if entry_id in seen:
            raise CorpusFormatError(
                f"{path}:{line_no}: duplicate id {entry_id!r}"
                f" (first seen on line {seen[entry_id]})"
            )
        seen[entry_id] = line_no
        predictions.append(PredictionEntry(id=entry_id, caption=caption))
    if corpus is not None:
        known = {entry.id for entry in corpus}
        unknown = [p.id for p in predictions if p.id not in known]
        if unknown:
            raise CorpusFormatError(
                f"{path}: prediction ids not present in corpus: {unknown[:5]}"
            )
    return predictions


def validate_entry(entry: CorpusEntry) -> ValidationReport:
    """Run the structural checks on one entry. Findings are data, not failures."""
    errors: list[str] = []
    warnings: list[str] = []
    if not entry.id:
        errors.append("EMPTY_ID")
    if entry.duration_s < 0:
        errors.append("NEGATIVE_DURATION")
    for text in (entry.captions.general, entry.captions.spatial, entry.captions.temporal):
        if word_count(text) < 1:
            errors.append("EMPTY_CAPTION")
            break
    words = word_count(entry.captions.general)
    low, high = WORD_COUNT_RANGE
    if 0 < words < low:
        warnings.append("WORD_COUNT_LOW")
    elif words > high:
        warnings.append("WORD_COUNT_HIGH")
    if entry.category not in MAJOR_CATEGORIES:
        warnings.append("UNKNOWN_CATEGORY")
    return ValidationReport(
        entry_id=entry.id,
        errors=tuple(errors),
        warnings=tuple(warnings),
        word_count_general=words,
    )


def corpus_stats(entries: list[CorpusEntry]) -> CorpusStats:
    """Summary statistics over a loaded corpus."""
    if not entries:
        raise ValueError("corpus_stats requires a non-empty corpus")
    per_category: dict[str, int] = {}
    total_words = 0
    total_duration = 0.0
    for entry in entries:
        per_category[entry.category] = per_category.get(entry.category, 0) + 1
        total_words += word_count(entry.captions.general)
        total_duration += entry.duration_s
    n = len(entries)
    return CorpusStats(
        count=n,
        mean_words=total_words / n,
        mean_duration_s=total_duration / n,
        per_category=dict(sorted(per_category.items())),
    )
