"""Command-line surface tying the evaluation modules into reproducible runs.

Subcommands: validate, stats, eval-retrieval, rebias, eval-caption,
extract-elements, train-adapt, embed-text, topk-tokens, report.

Every evaluating subcommand emits a machine-readable JSON report (stdout or
``--out``); the ``report`` subcommand re-renders a saved report as markdown
and can write figures and a CSV table alongside. Exit codes: 0 success,
1 validation findings of severity error, 2 operational failure.

Flags override values from an optional ``--config`` JSON file; the fully
resolved configuration is echoed into every report. Set
``SOURCE_DATE_EPOCH`` to pin report timestamps for byte-reproducible runs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import adapt, capst, corpus, embeddings, retrieval
from .judge import (
    BACKEND_HTTP,
    BACKEND_MOCK,
    JudgeConfig,
    JudgeError,
    extract_elements,
)
from .report import EvalReport, from_json, render_csv, render_markdown, to_json

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_FAILURE = 2

_OPERATIONAL_ERRORS = (
    corpus.CorpusFormatError,
    embeddings.EmbeddingFormatError,
    adapt.TripletFormatError,
    adapt.CheckpointFormatError,
    adapt.TrainingDiverged,
    JudgeError,
    ValueError,
    OSError,
)


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    data = json.loads(Path(path).read_text("utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    return data


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge flag values over config-file values over hard defaults."""
    file_values = _load_config_file(getattr(args, "config", None))
    resolved = {}
    for key, default in defaults.items():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            resolved[key] = flag_value
        elif key in file_values:
            resolved[key] = file_values[key]
        else:
            resolved[key] = default
    return resolved


def _emit(report: EvalReport, out: str | None) -> None:
    text = to_json(report)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_ks(value: str) -> list[int]:
    return [int(part) for part in value.split(",") if part.strip()]


def _parse_recalls(value: str) -> dict[int, float]:
    parts = [float(part) for part in value.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated recalls, got {value!r}")
    return {1: parts[0], 5: parts[1], 10: parts[2]}


def _judge_config(resolved: dict) -> JudgeConfig:
    return JudgeConfig(
        backend=resolved["backend"],
        base_url=resolved["base_url"] or "",
        model_name=resolved["model"],
        api_key_env=resolved["api_key_env"],
        max_in_flight=int(resolved["max_in_flight"]),
        max_retries=int(resolved["max_retries"]),
        timeout_s=float(resolved["timeout_s"]),
        cache_dir=resolved["cache_dir"],
        element_cap=int(resolved["element_cap"]),
    )


_JUDGE_DEFAULTS = {
    "backend": BACKEND_MOCK,
    "base_url": None,
    "model": "mock-judge",
    "api_key_env": "JUDGE_API_KEY",
    "max_in_flight": 8,
    "max_retries": 3,
    "timeout_s": 60.0,
    "cache_dir": None,
    "element_cap": 50,
}


def _add_judge_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=[BACKEND_MOCK, BACKEND_HTTP])
    parser.add_argument("--base-url", dest="base_url")
    parser.add_argument("--model")
    parser.add_argument("--api-key-env", dest="api_key_env")
    parser.add_argument("--max-in-flight", dest="max_in_flight", type=int)
    parser.add_argument("--max-retries", dest="max_retries", type=int)
    parser.add_argument("--timeout-s", dest="timeout_s", type=float)
    parser.add_argument("--cache-dir", dest="cache_dir")
    parser.add_argument("--element-cap", dest="element_cap", type=int)


# -- subcommand handlers -------------------------------------------------------


def _cmd_validate(args: argparse.Namespace) -> int:
    resolved = _resolve(args, {"corpus": None})
    entries = corpus.load_corpus(resolved["corpus"])
    reports = [corpus.validate_entry(entry) for entry in entries]
    payload = {
        "entries": [asdict(r) for r in reports],
        "n_entries": len(reports),
        "n_with_errors": sum(1 for r in reports if r.errors),
        "n_with_warnings": sum(1 for r in reports if r.warnings),
    }
    report = EvalReport(
        command="validate",
        payload_type="validation",
        payload=payload,
        config=resolved,
    )
    _emit(report, args.out)
    return EXIT_FINDINGS if payload["n_with_errors"] else EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    resolved = _resolve(args, {"corpus": None})
    entries = corpus.load_corpus(resolved["corpus"])
    stats = corpus.corpus_stats(entries)
    payload = asdict(stats)
    payload["durations_s"] = [entry.duration_s for entry in entries]
    payload["word_counts"] = [
        corpus.word_count(entry.captions.general) for entry in entries
    ]
    report = EvalReport(
        command="stats", payload_type="stats", payload=payload, config=resolved
    )
    _emit(report, args.out)
    return EXIT_OK


def _recall_table_payload(table: retrieval.RecallTable) -> dict:
    return {
        "split": table.split,
        "t2v": {str(k): v for k, v in sorted(table.t2v.items())},
        "v2t": {str(k): v for k, v in sorted(table.v2t.items())},
    }


def _cmd_eval_retrieval(args: argparse.Namespace) -> int:
    defaults = {
        "text_data": None,
        "text_ids": None,
        "video_data": None,
        "video_ids": None,
        "split": "general",
        "ks": "1,5,10",
    }
    resolved = _resolve(args, defaults)
    text_emb = embeddings.read_embeddings(resolved["text_data"], resolved["text_ids"])
    video_emb = embeddings.read_embeddings(
        resolved["video_data"], resolved["video_ids"]
    )
    ks = _parse_ks(resolved["ks"])
    table = retrieval.eval_retrieval(text_emb, video_emb, ks, resolved["split"])
    payload = _recall_table_payload(table)
    payload["n"] = text_emb.n
    report = EvalReport(
        command="eval-retrieval",
        payload_type="retrieval",
        payload=payload,
        config=resolved,
        provenance=[
            "ranking: descending cosine similarity, ties by ascending gallery row index",
            "pairing is by id; similarity arithmetic in double precision",
        ],
    )
    _emit(report, args.out)
    return EXIT_OK


def _table_from_report_file(path: str, split: str) -> retrieval.RecallTable:
    report = from_json(Path(path).read_text("utf-8"))
    if report.payload_type != "retrieval":
        raise ValueError(f"{path}: not a retrieval report")
    payload = report.payload
    return retrieval.RecallTable(
        split=split,
        t2v={int(k): v for k, v in payload["t2v"].items()},
        v2t={int(k): v for k, v in payload["v2t"].items()},
    )


def _cmd_rebias(args: argparse.Namespace) -> int:
    defaults = {
        "spatial_report": None,
        "temporal_report": None,
        "spatial_t2v": None,
        "spatial_v2t": None,
        "temporal_t2v": None,
        "temporal_v2t": None,
        "orientation": retrieval.ORIENTATION_TABLE3,
    }
    resolved = _resolve(args, defaults)
    if resolved["spatial_report"] and resolved["temporal_report"]:
        spatial = _table_from_report_file(resolved["spatial_report"], "spatial")
        temporal = _table_from_report_file(resolved["temporal_report"], "temporal")
    else:
        direct = [
            resolved["spatial_t2v"],
            resolved["spatial_v2t"],
            resolved["temporal_t2v"],
            resolved["temporal_v2t"],
        ]
        if not all(direct):
            raise ValueError(
                "provide --spatial-report/--temporal-report or all four recall flags"
            )
        spatial = retrieval.RecallTable(
            split="spatial",
            t2v=_parse_recalls(resolved["spatial_t2v"]),
            v2t=_parse_recalls(resolved["spatial_v2t"]),
        )
        temporal = retrieval.RecallTable(
            split="temporal",
            t2v=_parse_recalls(resolved["temporal_t2v"]),
            v2t=_parse_recalls(resolved["temporal_v2t"]),
        )
    score = retrieval.rebias(spatial, temporal, resolved["orientation"])
    other = (
        retrieval.ORIENTATION_EQ1
        if resolved["orientation"] == retrieval.ORIENTATION_TABLE3
        else retrieval.ORIENTATION_TABLE3
    )
    alternate = retrieval.rebias(spatial, temporal, other)
    report = EvalReport(
        command="rebias",
        payload_type="rebias",
        payload=asdict(score),
        config=resolved,
        provenance=[
            retrieval.ORIENTATION_NOTE.format(orientation=score.orientation),
            f"alternate orientation {other}: {alternate.bias_percent!r}",
        ],
    )
    _emit(report, args.out)
    return EXIT_OK


def _cmd_eval_caption(args: argparse.Namespace) -> int:
    defaults = {
        "corpus": None,
        "predictions": None,
        "aspects": "object,event",
        **_JUDGE_DEFAULTS,
    }
    resolved = _resolve(args, defaults)
    entries = corpus.load_corpus(resolved["corpus"])
    predictions = corpus.load_predictions(resolved["predictions"], entries)
    config = _judge_config(resolved)
    aspects = tuple(
        aspect.strip() for aspect in resolved["aspects"].split(",") if aspect.strip()
    )
    capst_report = capst.evaluate_predictions(entries, predictions, config, aspects)
    payload = {
        "per_category": {
            category: {role: asdict(stats) for role, stats in group.items()}
            for category, group in capst_report.per_category.items()
        },
        "overall": {
            role: asdict(stats) for role, stats in capst_report.overall.items()
        },
        "judged_videos": capst_report.judged_videos,
        "skipped": capst_report.skipped,
        "metadata": capst_report.metadata,
    }
    report = EvalReport(
        command="eval-caption",
        payload_type="capst",
        payload=payload,
        config=resolved,
        provenance=[capst.DENOMINATOR_NOTE],
    )
    _emit(report, args.out)
    return EXIT_OK


def _cmd_extract_elements(args: argparse.Namespace) -> int:
    defaults = {"text": None, "aspect": "object", **_JUDGE_DEFAULTS}
    resolved = _resolve(args, defaults)
    if not resolved["text"]:
        raise ValueError("--text is required")
    config = _judge_config(resolved)
    result = extract_elements(resolved["text"], resolved["aspect"], config)
    payload = {
        "aspect": resolved["aspect"],
        "elements": [element.text for element in result.elements],
        "truncated": result.truncated,
    }
    report = EvalReport(
        command="extract-elements",
        payload_type="extraction",
        payload=payload,
        config=resolved,
    )
    _emit(report, args.out)
    return EXIT_OK


def _heldout_margin(
    encoder: adapt.ToyEncoder, triplets: list[adapt.NliTriplet]
) -> dict:
    import numpy as np

    def cosine(u, v):
        return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))

    pos, neg = [], []
    for triplet in triplets:
        anchor = adapt.encode(encoder, triplet.anchor)
        pos.append(cosine(anchor, adapt.encode(encoder, triplet.positive)))
        neg.append(cosine(anchor, adapt.encode(encoder, triplet.negative)))
    return {
        "mean_cos_positive": float(np.mean(pos)),
        "mean_cos_negative": float(np.mean(neg)),
        "margin": float(np.mean(pos) - np.mean(neg)),
        "n_triplets": len(triplets),
    }


def _cmd_train_adapt(args: argparse.Namespace) -> int:
    defaults = {
        "triplets": None,
        "heldout": None,
        "synthetic_topics": None,
        "checkpoint": None,
        "epochs": 30,
        "batch_size": 16,
        "learning_rate": 0.05,
        "tau": 0.05,
        "dim": 32,
        "seed": 0,
        "init_scale": 0.1,
    }
    resolved = _resolve(args, defaults)
    heldout: list[adapt.NliTriplet] = []
    if resolved["synthetic_topics"] is not None:
        data = adapt.make_topic_triplets(
            n_train=int(resolved["synthetic_topics"]), seed=int(resolved["seed"])
        )
        triplets, heldout = data.train, data.heldout
    elif resolved["triplets"]:
        triplets = adapt.load_triplets(resolved["triplets"])
        if resolved["heldout"]:
            heldout = adapt.load_triplets(resolved["heldout"])
    else:
        raise ValueError("provide --triplets FILE or --synthetic-topics N")

    config = adapt.TrainConfig(
        epochs=int(resolved["epochs"]),
        batch_size=int(resolved["batch_size"]),
        learning_rate=float(resolved["learning_rate"]),
        tau=float(resolved["tau"]),
        dim=int(resolved["dim"]),
        seed=int(resolved["seed"]),
        init_scale=float(resolved["init_scale"]),
    )
    result = adapt.train(triplets, config)
    if resolved["checkpoint"]:
        adapt.save_encoder(result.encoder, resolved["checkpoint"])
    payload = {
        "n_triplets": len(triplets),
        "initial_loss": result.initial_loss,
        "final_loss": result.final_loss,
        "epoch_losses": result.epoch_losses,
        "vocab_size": result.encoder.vocab_size,
        "dim": result.encoder.dim,
    }
    if heldout:
        payload["heldout"] = _heldout_margin(result.encoder, heldout)
    report = EvalReport(
        command="train-adapt",
        payload_type="training",
        payload=payload,
        config=resolved,
        provenance=["optimizer: plain minibatch gradient descent, seed-deterministic"],
    )
    _emit(report, args.out)
    return EXIT_OK


def _cmd_embed_text(args: argparse.Namespace) -> int:
    defaults = {
        "checkpoint": None,
        "input": None,
        "ids_file": None,
        "data": None,
        "ids": None,
    }
    resolved = _resolve(args, defaults)
    for key in ("checkpoint", "input", "data", "ids"):
        if not resolved[key]:
            raise ValueError(f"--{key.replace('_', '-')} is required")
    encoder = adapt.load_encoder(resolved["checkpoint"])
    texts = [
        line
        for line in Path(resolved["input"]).read_text("utf-8").splitlines()
        if line.strip()
    ]
    if not texts:
        raise ValueError(f"{resolved['input']}: no texts to embed")
    if resolved["ids_file"]:
        ids = Path(resolved["ids_file"]).read_text("utf-8").splitlines()
        if len(ids) != len(texts):
            raise ValueError(
                f"{resolved['ids_file']}: {len(ids)} ids for {len(texts)} texts"
            )
    else:
        ids = [f"text-{i:06d}" for i in range(1, len(texts) + 1)]
    import numpy as np

    rows = np.stack([adapt.encode(encoder, text) for text in texts])
    matrix = embeddings.EmbeddingMatrix(ids=tuple(ids), data=rows.astype(np.float32))
    embeddings.write_embeddings(matrix, resolved["data"], resolved["ids"])
    sys.stderr.write(
        f"embedded {len(texts)} texts (d={encoder.dim}) -> {resolved['data']}\n"
    )
    return EXIT_OK


def _cmd_topk_tokens(args: argparse.Namespace) -> int:
    defaults = {"checkpoint": None, "text": None, "k": 10}
    resolved = _resolve(args, defaults)
    if not resolved["checkpoint"] or not resolved["text"]:
        raise ValueError("--checkpoint and --text are required")
    encoder = adapt.load_encoder(resolved["checkpoint"])
    projection = adapt.vocab_projection(encoder)
    embedding = adapt.encode(encoder, resolved["text"])
    tokens = adapt.topk_tokens(embedding, projection, int(resolved["k"]))
    payload = {"text": resolved["text"], "k": int(resolved["k"]), "tokens": tokens}
    report = EvalReport(
        command="topk-tokens",
        payload_type="topk",
        payload=payload,
        config={key: resolved[key] for key in ("checkpoint", "k")},
        provenance=[
            "head rows are the encoder's single-token embeddings; "
            "logit = dot(token embedding, text embedding)"
        ],
    )
    _emit(report, args.out)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    defaults = {"input": None, "format": "markdown", "figures_dir": None}
    resolved = _resolve(args, defaults)
    report = from_json(Path(resolved["input"]).read_text("utf-8"))
    if resolved["format"] == "json":
        rendered = to_json(report)
    else:
        rendered = render_markdown(report)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    if resolved["figures_dir"]:
        from .figures import render_figures

        outdir = Path(resolved["figures_dir"])
        outdir.mkdir(parents=True, exist_ok=True)
        written = render_figures(report, outdir)
        csv_path = outdir / "metrics.csv"
        csv_path.write_text(render_csv(report), encoding="utf-8")
        written.append(csv_path)
        for path in written:
            sys.stderr.write(f"wrote {path}\n")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="careval",
        description="Fine-grained video caption and retrieval evaluation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--out", help="write the JSON report here instead of stdout")

    p = sub.add_parser("validate", help="Structural validation of a corpus file.")
    p.add_argument("--corpus", required=True)
    common(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("stats", help="Corpus summary statistics.")
    p.add_argument("--corpus", required=True)
    common(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("eval-retrieval", help="Recall@K for text<->video retrieval.")
    p.add_argument("--text-data", dest="text_data", required=True)
    p.add_argument("--text-ids", dest="text_ids", required=True)
    p.add_argument("--video-data", dest="video_data", required=True)
    p.add_argument("--video-ids", dest="video_ids", required=True)
    p.add_argument("--split", choices=list(retrieval.SPLITS))
    p.add_argument("--ks", help="comma-separated K values, default 1,5,10")
    common(p)
    p.set_defaults(func=_cmd_eval_retrieval)

    p = sub.add_parser("rebias", help="Spatiotemporal retrieval-bias score.")
    p.add_argument("--spatial-report", dest="spatial_report")
    p.add_argument("--temporal-report", dest="temporal_report")
    p.add_argument("--spatial-t2v", dest="spatial_t2v", help="R@1,R@5,R@10")
    p.add_argument("--spatial-v2t", dest="spatial_v2t", help="R@1,R@5,R@10")
    p.add_argument("--temporal-t2v", dest="temporal_t2v", help="R@1,R@5,R@10")
    p.add_argument("--temporal-v2t", dest="temporal_v2t", help="R@1,R@5,R@10")
    p.add_argument("--orientation", choices=list(retrieval.ORIENTATIONS))
    common(p)
    p.set_defaults(func=_cmd_rebias)

    p = sub.add_parser(
        "eval-caption", help="Judge-based caption precision/recall/F1 (CapST)."
    )
    p.add_argument("--corpus", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--aspects", help="comma-separated subset of: object,event")
    _add_judge_flags(p)
    common(p)
    p.set_defaults(func=_cmd_eval_caption)

    p = sub.add_parser("extract-elements", help="Run element extraction on one caption.")
    p.add_argument("--text", required=True)
    p.add_argument("--aspect", choices=["object", "event"])
    _add_judge_flags(p)
    common(p)
    p.set_defaults(func=_cmd_extract_elements)

    p = sub.add_parser("train-adapt", help="Train the toy contrastive encoder.")
    p.add_argument("--triplets", help="NLI triplet file")
    p.add_argument("--heldout", help="held-out triplet file for margin metrics")
    p.add_argument(
        "--synthetic-topics",
        dest="synthetic_topics",
        type=int,
        help="generate N synthetic topic triplets instead of reading a file",
    )
    p.add_argument("--checkpoint", help="write the trained encoder here")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--init-scale", dest="init_scale", type=float)
    common(p)
    p.set_defaults(func=_cmd_train_adapt)

    p = sub.add_parser(
        "embed-text", help="Embed texts with a trained encoder to a CAREEMB1 file."
    )
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="one text per line")
    p.add_argument("--ids-file", dest="ids_file", help="one id per line, row order")
    p.add_argument("--data", required=True, help="output CAREEMB1 data file")
    p.add_argument("--ids", required=True, help="output ids sidecar")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.set_defaults(func=_cmd_embed_text)

    p = sub.add_parser("topk-tokens", help="Vocabulary projection of a text embedding.")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("-k", "--k", type=int)
    common(p)
    p.set_defaults(func=_cmd_topk_tokens)

    p = sub.add_parser("report", help="Render a saved JSON report.")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["json", "markdown"])
    p.add_argument(
        "--figures-dir",
        dest="figures_dir",
        help="also write figures and metrics.csv into this directory",
    )
    common(p)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _OPERATIONAL_ERRORS as exc:
        print(f"careval: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
