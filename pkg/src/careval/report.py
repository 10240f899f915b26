"""Evaluation reports: a single envelope, rendered as JSON, markdown, or CSV.

The JSON form is the machine-readable artifact: stable key order, full
double precision, byte-identical across reruns with the same inputs (the
timestamp honors ``SOURCE_DATE_EPOCH`` for reproducible pipelines). The
markdown form mirrors the usual leaderboard shapes -- ``R@1/R@5/R@10``
columns for retrieval, ``F1/Recall/Precision`` cells for caption scoring --
with one-decimal rounding applied only at rendering time.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from . import __version__

PAYLOAD_TYPES = (
    "validation",
    "stats",
    "retrieval",
    "rebias",
    "unified",
    "capst",
    "extraction",
    "training",
    "topk",
)


@dataclass
class EvalReport:
    command: str
    payload_type: str
    payload: dict
    config: dict = field(default_factory=dict)
    provenance: list[str] = field(default_factory=list)
    tool_version: str = __version__
    timestamp: str = ""

    def __post_init__(self):
        if self.payload_type not in PAYLOAD_TYPES:
            raise ValueError(f"unknown payload type {self.payload_type!r}")
        if not self.timestamp:
            self.timestamp = _timestamp()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def to_json(report: EvalReport) -> str:
    return json.dumps(asdict(report), sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def from_json(text: str) -> EvalReport:
    record = json.loads(text)
    return EvalReport(
        command=record["command"],
        payload_type=record["payload_type"],
        payload=record["payload"],
        config=record.get("config", {}),
        provenance=record.get("provenance", []),
        tool_version=record.get("tool_version", __version__),
        timestamp=record.get("timestamp", ""),
    )


def render_report(report: EvalReport, format: str = "markdown") -> str:
    if format == "json":
        return to_json(report)
    if format == "markdown":
        return render_markdown(report)
    raise ValueError(f"unknown report format {format!r}")


# -- markdown ---------------------------------------------------------------


def _md_table(rows: list[list[str]]) -> str:
    header, body = rows[0], rows[1:]
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    lines += ["| " + " | ".join(row) + " |" for row in body]
    return "\n".join(lines)


def _fmt(value: float) -> str:
    return f"{value:.1f}"


def triple_cell(f1: float, recall: float, precision: float) -> str:
    """The F1/Recall/Precision cell convention, fractions in, percents out."""
    return f"{100 * f1:.1f}/{100 * recall:.1f}/{100 * precision:.1f}"


def _markdown_retrieval(payload: dict) -> list[str]:
    ks = sorted(int(k) for k in payload["t2v"])
    rows = [["Split", "Direction"] + [f"R@{k}" for k in ks]]
    for direction in ("t2v", "v2t"):
        label = "Text-to-Video" if direction == "t2v" else "Video-to-Text"
        rows.append(
            [payload["split"], label]
            + [_fmt(payload[direction][str(k)]) for k in ks]
        )
    return [_md_table(rows)]


def _markdown_rebias(payload: dict) -> list[str]:
    rows = [
        ["Mean spatial recall", "Mean temporal recall", "Bias %"],
        [
            _fmt(payload["mean_spatial"]),
            _fmt(payload["mean_temporal"]),
            f"{payload['bias_percent']:.2f}",
        ],
    ]
    return [_md_table(rows), f"Orientation: `{payload['orientation']}`."]


def _markdown_unified(payload: dict) -> list[str]:
    rows = [
        ["Avg. R@1", "Avg. F1", "Unified score"],
        [_fmt(payload["avg_r1"]), _fmt(payload["avg_f1"]), _fmt(payload["score"])],
    ]
    return [_md_table(rows)]


def _markdown_capst(payload: dict) -> list[str]:
    roles = ("action", "object")
    rows = [["Category"] + [f"{role.title()} (F1/R/P)" for role in roles]]

    def cells(group: dict) -> list[str]:
        out = []
        for role in roles:
            stats = group.get(role)
            if stats is None:
                out.append("-")
            else:
                out.append(triple_cell(stats["f1"], stats["recall"], stats["precision"]))
        return out

    for category, group in payload["per_category"].items():
        rows.append([category] + cells(group))
    rows.append(["**Overall**"] + cells(payload["overall"]))
    parts = [_md_table(rows)]
    if payload.get("skipped"):
        skipped = ", ".join(f"{vid} ({reason})" for vid, reason in payload["skipped"])
        parts.append(f"Skipped: {skipped}.")
    meta = payload.get("metadata", {})
    if meta:
        parts.append(
            "Judge: `{model}` via `{backend}`; element cap {cap}; {denominators}.".format(
                model=meta.get("judge_model", "?"),
                backend=meta.get("judge_backend", "?"),
                cap=meta.get("element_cap", "?"),
                denominators=meta.get("denominators", ""),
            )
        )
    return parts


def _markdown_validation(payload: dict) -> list[str]:
    rows = [["Entry", "Errors", "Warnings", "General words"]]
    for entry in payload["entries"]:
        rows.append(
            [
                entry["entry_id"],
                ", ".join(entry["errors"]) or "-",
                ", ".join(entry["warnings"]) or "-",
                str(entry["word_count_general"]),
            ]
        )
    summary = (
        f"{payload['n_entries']} entries; "
        f"{payload['n_with_errors']} with errors, "
        f"{payload['n_with_warnings']} with warnings."
    )
    return [summary, _md_table(rows)]


def _markdown_stats(payload: dict) -> list[str]:
    rows = [
        ["Entries", "Mean words", "Mean duration (s)"],
        [
            str(payload["count"]),
            f"{payload['mean_words']:.2f}",
            f"{payload['mean_duration_s']:.2f}",
        ],
    ]
    category_rows = [["Category", "Count"]] + [
        [category, str(count)] for category, count in payload["per_category"].items()
    ]
    return [_md_table(rows), _md_table(category_rows)]


def _markdown_training(payload: dict) -> list[str]:
    rows = [
        ["Triplets", "Epochs", "Initial loss", "Final loss"],
        [
            str(payload["n_triplets"]),
            str(len(payload["epoch_losses"])),
            f"{payload['initial_loss']:.6f}",
            f"{payload['final_loss']:.6f}",
        ],
    ]
    return [_md_table(rows)]


def _markdown_topk(payload: dict) -> list[str]:
    rows = [["Rank", "Token", "Logit"]] + [
        [str(i + 1), token, f"{logit:.4f}"]
        for i, (token, logit) in enumerate(payload["tokens"])
    ]
    return [_md_table(rows)]


def _markdown_extraction(payload: dict) -> list[str]:
    lines = [f"- {element}" for element in payload["elements"]]
    note = " (truncated)" if payload.get("truncated") else ""
    return [f"{len(payload['elements'])} {payload['aspect']} elements{note}:"] + [
        "\n".join(lines)
    ]


_MARKDOWN_RENDERERS = {
    "retrieval": _markdown_retrieval,
    "rebias": _markdown_rebias,
    "unified": _markdown_unified,
    "capst": _markdown_capst,
    "validation": _markdown_validation,
    "stats": _markdown_stats,
    "training": _markdown_training,
    "topk": _markdown_topk,
    "extraction": _markdown_extraction,
}


def render_markdown(report: EvalReport) -> str:
    parts = [f"# {report.command} report", ""]
    parts.append(
        f"Tool version {report.tool_version}; generated {report.timestamp}."
    )
    body = _MARKDOWN_RENDERERS[report.payload_type](report.payload)
    for chunk in body:
        parts += ["", chunk]
    if report.provenance:
        parts += ["", "Notes:"] + [f"- {note}" for note in report.provenance]
    return "\n".join(parts) + "\n"


# -- CSV ----------------------------------------------------------------------


def render_csv(report: EvalReport) -> str:
    """Flat delimited view of the report's main table (full precision)."""
    import csv

    buffer = io.StringIO()
    writer = csv.writer(buffer)
    payload = report.payload
    kind = report.payload_type
    if kind == "retrieval":
        ks = sorted(int(k) for k in payload["t2v"])
        writer.writerow(["split", "direction"] + [f"r@{k}" for k in ks])
        for direction in ("t2v", "v2t"):
            writer.writerow(
                [payload["split"], direction]
                + [repr(payload[direction][str(k)]) for k in ks]
            )
    elif kind == "rebias":
        writer.writerow(["mean_spatial", "mean_temporal", "bias_percent", "orientation"])
        writer.writerow(
            [
                repr(payload["mean_spatial"]),
                repr(payload["mean_temporal"]),
                repr(payload["bias_percent"]),
                payload["orientation"],
            ]
        )
    elif kind == "unified":
        writer.writerow(["avg_r1", "avg_f1", "score"])
        writer.writerow(
            [repr(payload["avg_r1"]), repr(payload["avg_f1"]), repr(payload["score"])]
        )
    elif kind == "capst":
        writer.writerow(["scope", "role", "f1", "recall", "precision", "n_videos"])
        for category, group in payload["per_category"].items():
            for role, stats in group.items():
                writer.writerow(
                    [category, role]
                    + [repr(stats[k]) for k in ("f1", "recall", "precision")]
                    + [stats["n_videos"]]
                )
        for role, stats in payload["overall"].items():
            writer.writerow(
                ["overall", role]
                + [repr(stats[k]) for k in ("f1", "recall", "precision")]
                + [stats["n_videos"]]
            )
    elif kind == "validation":
        writer.writerow(["entry_id", "errors", "warnings", "word_count_general"])
        for entry in payload["entries"]:
            writer.writerow(
                [
                    entry["entry_id"],
                    ";".join(entry["errors"]),
                    ";".join(entry["warnings"]),
                    entry["word_count_general"],
                ]
            )
    elif kind == "stats":
        writer.writerow(["count", "mean_words", "mean_duration_s"])
        writer.writerow(
            [
                payload["count"],
                repr(payload["mean_words"]),
                repr(payload["mean_duration_s"]),
            ]
        )
    elif kind == "training":
        writer.writerow(["epoch", "mean_loss"])
        for epoch, loss in enumerate(payload["epoch_losses"], start=1):
            writer.writerow([epoch, repr(loss)])
    elif kind == "topk":
        writer.writerow(["rank", "token", "logit"])
        for rank, (token, logit) in enumerate(payload["tokens"], start=1):
            writer.writerow([rank, token, repr(logit)])
    elif kind == "extraction":
        writer.writerow(["index", "aspect", "element"])
        for index, element in enumerate(payload["elements"], start=1):
            writer.writerow([index, payload["aspect"], element])
    else:
        raise ValueError(f"no CSV view for payload type {kind!r}")
    return buffer.getvalue()
