"""Export driver for external multimodal LLM runtimes.

Produces caption prediction files and CAREEMB1 embedding files that load
directly into the evaluation toolkit. The model runtime is injected behind
a two-function interface (:class:`careval_exporter.runtime.ModelRuntime`),
so everything here is testable against the deterministic stub with no model
download or GPU.
"""

from .config import DEFAULT_CAPTION_PROMPT, DEFAULT_EOL_TEMPLATE, ExporterConfig, render_eol_prompt
from .export import ExportReport, export_captions, export_embeddings
from .runtime import ModelRuntime, StubRuntime

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CAPTION_PROMPT",
    "DEFAULT_EOL_TEMPLATE",
    "ExporterConfig",
    "render_eol_prompt",
    "ExportReport",
    "export_captions",
    "export_embeddings",
    "ModelRuntime",
    "StubRuntime",
]
