"""Caption and embedding export, emitting the evaluation toolkit's formats.

Outputs:

* prediction file: newline-delimited ``{"id": ..., "caption": ...}`` in
  corpus order;
* embedding files: CAREEMB1 data file (magic ``CAREEMB1``, uint32 N and D
  little-endian, float32 row-major payload) plus a one-id-per-line sidecar,
  and a ``<data>.meta.json`` echo of the configuration (model, frame
  sampling policy, template) for provenance.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExporterConfig, frame_times_s, render_eol_prompt
from .runtime import ModelRuntime

CAREEMB_MAGIC = b"CAREEMB1"
FRAME_POLICY = "uniform-midpoint"


class ExportError(RuntimeError):
    """Malformed inputs or an export that produced nothing."""


@dataclass
class ExportReport:
    written: int
    failures: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _read_corpus_records(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExportError(f"{path}:{line_no}: malformed JSON: {exc.msg}") from exc
            for key in ("id", "video_uri", "duration_s", "captions"):
                if key not in record:
                    raise ExportError(f"{path}:{line_no}: missing field {key!r}")
            records.append(record)
    if not records:
        raise ExportError(f"{path}: empty corpus")
    return records


def write_careemb(data_path: str | Path, ids_path: str | Path, rows, ids) -> None:
    matrix = np.asarray(rows, dtype="<f4")
    if matrix.ndim != 2 or matrix.shape[0] != len(ids):
        raise ExportError("embedding rows and ids are inconsistent")
    n, d = matrix.shape
    with open(data_path, "wb") as handle:
        handle.write(struct.pack("<8sII", CAREEMB_MAGIC, n, d))
        handle.write(matrix.tobytes(order="C"))
    Path(ids_path).write_text(
        "".join(f"{row_id}\n" for row_id in ids), encoding="utf-8"
    )


def _write_metadata(data_path: str | Path, config: ExporterConfig, extra: dict) -> None:
    payload = {
        "model": config.model,
        "frames_per_video": config.frames_per_video,
        "frame_policy": FRAME_POLICY,
        "caption_prompt": config.caption_prompt,
        "eol_template": config.eol_template,
    }
    payload.update(extra)
    meta_path = Path(str(data_path) + ".meta.json")
    meta_path.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def export_captions(
    config: ExporterConfig,
    runtime: ModelRuntime,
    corpus_path: str | Path,
    out_path: str | Path,
) -> ExportReport:
    """One prediction record per corpus entry, corpus order preserved.

    Per-video runtime failures are recorded and the video skipped; the
    report lists them so callers can exit nonzero.
    """
    records = _read_corpus_records(corpus_path)
    written = 0
    failures: list[tuple[str, str]] = []
    with open(out_path, "w", encoding="utf-8") as handle:
        for record in records:
            times = frame_times_s(float(record["duration_s"]), config.frames_per_video)
            try:
                caption = runtime.generate(
                    config.caption_prompt, record["video_uri"], times
                )
            except Exception as exc:
                failures.append((record["id"], str(exc)))
                continue
            handle.write(
                json.dumps(
                    {"id": record["id"], "caption": caption},
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
            handle.write("\n")
            written += 1
    return ExportReport(written=written, failures=failures)


def export_embeddings(
    config: ExporterConfig,
    runtime: ModelRuntime,
    modality: str,
    data_path: str | Path,
    ids_path: str | Path,
    corpus_path: str | Path | None = None,
    texts_path: str | Path | None = None,
    caption_split: str = "general",
) -> ExportReport:
    """Embed corpus videos, corpus captions, or a plain text list.

    - ``modality="video"``: one embedding per corpus entry from the video
      plus the caption prompt, frames sampled uniformly over the duration.
    - ``modality="text"``: each sentence is wrapped in the one-word-summary
      template before embedding. Sentences come from the chosen caption
      split of ``corpus_path``, or one per line from ``texts_path``.

    Row order equals input order.
    """
    if modality not in ("text", "video"):
        raise ExportError(f"unknown modality {modality!r}")
    rows: list = []
    ids: list[str] = []
    failures: list[tuple[str, str]] = []

    if modality == "video":
        if corpus_path is None:
            raise ExportError("video modality requires a corpus file")
        for record in _read_corpus_records(corpus_path):
            times = frame_times_s(float(record["duration_s"]), config.frames_per_video)
            try:
                vector = runtime.hidden_state_embed(
                    config.caption_prompt,
                    video_uri=record["video_uri"],
                    frame_times_s=times,
                )
            except Exception as exc:
                failures.append((record["id"], str(exc)))
                continue
            rows.append(vector)
            ids.append(record["id"])
    else:
        if corpus_path is not None:
            records = _read_corpus_records(corpus_path)
            if any(caption_split not in r["captions"] for r in records):
                raise ExportError(f"corpus lacks the {caption_split!r} caption split")
            sentences = [(r["id"], r["captions"][caption_split]) for r in records]
        elif texts_path is not None:
            lines = [
                line
                for line in Path(texts_path).read_text("utf-8").splitlines()
                if line.strip()
            ]
            if not lines:
                raise ExportError(f"{texts_path}: no texts to embed")
            sentences = [(f"text-{i:06d}", line) for i, line in enumerate(lines, 1)]
        else:
            raise ExportError("text modality requires a corpus file or a text list")
        for text_id, sentence in sentences:
            prompt = render_eol_prompt(config.eol_template, sentence)
            try:
                vector = runtime.hidden_state_embed(prompt)
            except Exception as exc:
                failures.append((text_id, str(exc)))
                continue
            rows.append(vector)
            ids.append(text_id)

    if not rows:
        raise ExportError("every input failed; nothing to write")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise ExportError(f"runtime returned inconsistent embedding widths: {widths}")
    write_careemb(data_path, ids_path, rows, ids)
    _write_metadata(
        data_path,
        config,
        {"modality": modality, "rows": len(ids), "dim": widths.pop()},
    )
    return ExportReport(written=len(ids), failures=failures)
