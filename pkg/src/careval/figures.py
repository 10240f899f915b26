"""Figure rendering for the report path.

Each renderer takes a report and writes PNG files into an output directory,
returning the written paths. Figures are a human-facing companion to the
delimited/JSON outputs, never a data source.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import EvalReport

_BAR_COLORS = ("#4878cf", "#ee854a")


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _figure_retrieval(report: EvalReport, outdir: Path) -> list[Path]:
    payload = report.payload
    ks = sorted(int(k) for k in payload["t2v"])
    x = np.arange(len(ks))
    width = 0.38
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for offset, (direction, label) in enumerate(
        (("t2v", "Text-to-Video"), ("v2t", "Video-to-Text"))
    ):
        values = [payload[direction][str(k)] for k in ks]
        ax.bar(x + (offset - 0.5) * width, values, width, label=label,
               color=_BAR_COLORS[offset])
    ax.set_xticks(x, [f"R@{k}" for k in ks])
    ax.set_ylabel("Recall (%)")
    ax.set_ylim(0, 100)
    ax.set_title(f"{payload['split']} retrieval")
    ax.legend()
    return [_save(fig, outdir / "retrieval_recall.png")]


def _figure_rebias(report: EvalReport, outdir: Path) -> list[Path]:
    payload = report.payload
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    ax.bar(
        ["spatial", "temporal"],
        [payload["mean_spatial"], payload["mean_temporal"]],
        color=_BAR_COLORS,
    )
    ax.set_ylabel("Mean recall (%)")
    ax.set_title(
        f"Split imbalance: {payload['bias_percent']:.2f}% "
        f"({payload['orientation']})"
    )
    return [_save(fig, outdir / "rebias.png")]


def _figure_capst(report: EvalReport, outdir: Path) -> list[Path]:
    payload = report.payload
    categories = list(payload["per_category"]) + ["overall"]
    groups = list(payload["per_category"].values()) + [payload["overall"]]
    roles = ("action", "object")
    x = np.arange(len(categories))
    width = 0.38
    fig, ax = plt.subplots(figsize=(1.6 + 1.4 * len(categories), 3.8))
    for offset, role in enumerate(roles):
        values = [100 * group.get(role, {}).get("f1", 0.0) for group in groups]
        ax.bar(x + (offset - 0.5) * width, values, width, label=role.title(),
               color=_BAR_COLORS[offset])
    ax.set_xticks(x, categories, rotation=20, ha="right")
    ax.set_ylabel("F1 (%)")
    ax.set_title("Caption element F1 by category")
    ax.legend()
    return [_save(fig, outdir / "capst_f1.png")]


def _figure_stats(report: EvalReport, outdir: Path) -> list[Path]:
    payload = report.payload
    paths = []
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    categories = list(payload["per_category"])
    x = np.arange(len(categories))
    ax.bar(x, [payload["per_category"][c] for c in categories], color=_BAR_COLORS[0])
    ax.set_ylabel("Videos")
    ax.set_xticks(x, categories, rotation=20, ha="right")
    ax.set_title("Corpus composition")
    paths.append(_save(fig, outdir / "stats_categories.png"))
    for key, label, name in (
        ("durations_s", "Duration (s)", "stats_durations.png"),
        ("word_counts", "General caption words", "stats_word_counts.png"),
    ):
        values = payload.get(key)
        if values:
            fig, ax = plt.subplots(figsize=(5.0, 3.6))
            ax.hist(values, bins=min(20, max(5, len(values) // 2)),
                    color=_BAR_COLORS[0])
            ax.set_xlabel(label)
            ax.set_ylabel("Videos")
            paths.append(_save(fig, outdir / name))
    return paths


def _figure_training(report: EvalReport, outdir: Path) -> list[Path]:
    payload = report.payload
    losses = payload["epoch_losses"]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(range(1, len(losses) + 1), losses, marker="o", color=_BAR_COLORS[0])
    ax.set_xlabel("Epoch")
    ax.set_ylabel("Mean batch loss")
    ax.set_title("Adaptation training loss")
    return [_save(fig, outdir / "training_loss.png")]


def _figure_topk(report: EvalReport, outdir: Path) -> list[Path]:
    payload = report.payload
    tokens = [token for token, _ in payload["tokens"]]
    logits = [logit for _, logit in payload["tokens"]]
    fig, ax = plt.subplots(figsize=(5.0, 0.6 + 0.3 * len(tokens)))
    y = np.arange(len(tokens))
    ax.barh(y, logits, color=_BAR_COLORS[0])
    ax.set_yticks(y, tokens)
    ax.invert_yaxis()
    ax.set_xlabel("Logit")
    ax.set_title("Vocabulary projection: top tokens")
    return [_save(fig, outdir / "topk_tokens.png")]


_RENDERERS = {
    "retrieval": _figure_retrieval,
    "rebias": _figure_rebias,
    "capst": _figure_capst,
    "stats": _figure_stats,
    "training": _figure_training,
    "topk": _figure_topk,
}


def render_figures(report: EvalReport, outdir: str | Path) -> list[Path]:
    """Write the figures for this report type; unknown types yield no figures."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    renderer = _RENDERERS.get(report.payload_type)
    if renderer is None:
        return []
    return renderer(report, outdir)
