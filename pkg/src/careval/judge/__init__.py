"""Pluggable LLM judge: element extraction and NLI entailment.

Backends: ``http_chat`` (any chat-completion endpoint, cached, bounded
concurrency) and ``mock`` (pure, deterministic, offline; rules documented
in :mod:`careval.judge.mock`).
"""

from .gateway import (
    BACKEND_HTTP,
    BACKEND_MOCK,
    DEFAULT_ELEMENT_CAP,
    Element,
    ExtractionResult,
    JudgeClient,
    JudgeConfig,
    JudgeError,
    JudgeVerdict,
    ResponseCache,
    cache_key,
    content_hash,
    extract_elements,
    judge_entailment,
    judge_entailments,
    run_bounded,
)
from .templates import (
    ENTAILMENT_TEMPLATE_ID,
    EVENT_EXTRACT_TEMPLATE_ID,
    OBJECT_EXTRACT_TEMPLATE_ID,
)

__all__ = [
    "BACKEND_HTTP",
    "BACKEND_MOCK",
    "DEFAULT_ELEMENT_CAP",
    "Element",
    "ExtractionResult",
    "JudgeClient",
    "JudgeConfig",
    "JudgeError",
    "JudgeVerdict",
    "ResponseCache",
    "cache_key",
    "content_hash",
    "extract_elements",
    "judge_entailment",
    "judge_entailments",
    "run_bounded",
    "ENTAILMENT_TEMPLATE_ID",
    "EVENT_EXTRACT_TEMPLATE_ID",
    "OBJECT_EXTRACT_TEMPLATE_ID",
]
