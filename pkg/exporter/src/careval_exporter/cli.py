"""Command-line entry points for the export scripts.

Only the deterministic stub runtime is wired in here; a real model runtime
is injected programmatically by importing :func:`careval_exporter.export.
export_captions` / :func:`export_embeddings` with an object implementing
the two-function runtime interface.
"""

from __future__ import annotations

import argparse
import sys

from .config import ExporterConfig
from .export import ExportError, export_captions, export_embeddings
from .runtime import StubRuntime


def _config_from(args: argparse.Namespace) -> ExporterConfig:
    kwargs = {"model": args.model, "frames_per_video": args.frames_per_video}
    if args.caption_prompt is not None:
        kwargs["caption_prompt"] = args.caption_prompt
    if args.eol_template is not None:
        kwargs["eol_template"] = args.eol_template
    return ExporterConfig(**kwargs)


def _runtime_from(args: argparse.Namespace) -> StubRuntime:
    if args.runtime != "stub":
        raise ExportError(
            "only the stub runtime is built in; inject a real runtime via the API"
        )
    return StubRuntime(dim=args.stub_dim)


def _report_failures(report) -> int:
    for item_id, reason in report.failures:
        print(f"careval-export: failed {item_id}: {reason}", file=sys.stderr)
    print(
        f"careval-export: wrote {report.written} records"
        f" ({len(report.failures)} failures)",
        file=sys.stderr,
    )
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="careval-export",
        description="Drive a model runtime to emit prediction and embedding files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", default="stub")
        p.add_argument("--frames-per-video", dest="frames_per_video", type=int, default=32)
        p.add_argument("--caption-prompt", dest="caption_prompt")
        p.add_argument("--eol-template", dest="eol_template")
        p.add_argument("--runtime", choices=["stub"], default="stub")
        p.add_argument("--stub-dim", dest="stub_dim", type=int, default=4)

    p = sub.add_parser("captions", help="Caption every corpus video.")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("embeddings", help="Embed corpus videos, captions, or texts.")
    p.add_argument("--modality", choices=["text", "video"], required=True)
    p.add_argument("--corpus")
    p.add_argument("--texts")
    p.add_argument("--split", default="general", help="caption split for text modality")
    p.add_argument("--data", required=True, help="output CAREEMB1 data file")
    p.add_argument("--ids", required=True, help="output ids sidecar")
    common(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = _config_from(args)
    try:
        runtime = _runtime_from(args)
        if args.command == "captions":
            report = export_captions(config, runtime, args.corpus, args.out)
        else:
            report = export_embeddings(
                config,
                runtime,
                args.modality,
                args.data,
                args.ids,
                corpus_path=args.corpus,
                texts_path=args.texts,
                caption_split=args.split,
            )
    except (ExportError, OSError) as exc:
        print(f"careval-export: error: {exc}", file=sys.stderr)
        return 2
    return _report_failures(report)


if __name__ == "__main__":
    sys.exit(main())
