"""Judge dispatch: backends, strict response parsing, caching, bounded concurrency.

The HTTP backend targets any chat-completion-style endpoint: POST ``base_url``
with JSON ``{"model": ..., "messages": [{"role": "user", "content": ...}],
"temperature": 0.0}`` and a bearer token taken from the environment variable
named by ``api_key_env``. The answer is read from
``response["choices"][0]["message"]["content"]``.

Responses are cached one file per key under ``cache_dir``; the key is the
SHA-256 of ``model_name \\x00 template_id \\x00 rendered_prompt`` (UTF-8).
Cache writes are atomic (temp file + rename), so concurrent processes and
retried requests can never produce duplicate or torn entries. With a warm
cache an evaluation never touches the network.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from . import mock as _mock
from . import templates

BACKEND_HTTP = "http_chat"
BACKEND_MOCK = "mock"
DEFAULT_ELEMENT_CAP = 50

T = TypeVar("T")


class JudgeError(RuntimeError):
    """Backend unreachable, or a response stayed unparseable after reprompt."""


@dataclass(frozen=True)
class Element:
    """One atomic object-with-attribute or event extracted from a caption."""

    text: str
    aspect: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("element text must be non-empty")
        if self.aspect not in ("object", "event"):
            raise ValueError(f"unknown aspect {self.aspect!r}")


@dataclass(frozen=True)
class JudgeVerdict:
    description_hash: str
    element: Element
    entailed: bool
    raw_response: str


@dataclass(frozen=True)
class ExtractionResult:
    elements: tuple[Element, ...]
    truncated: bool


@dataclass
class JudgeConfig:
    backend: str = BACKEND_MOCK
    base_url: str = ""
    model_name: str = "mock-judge"
    api_key_env: str = "JUDGE_API_KEY"
    max_in_flight: int = 8
    max_retries: int = 3
    timeout_s: float = 60.0
    cache_dir: str | Path | None = None
    element_cap: int = DEFAULT_ELEMENT_CAP
    retry_backoff_s: float = 0.5
    extra_headers: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.backend not in (BACKEND_HTTP, BACKEND_MOCK):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.backend == BACKEND_HTTP and not self.base_url:
            raise ValueError("http_chat backend requires base_url")
        if self.element_cap < 1:
            raise ValueError("element_cap must be >= 1")


def cache_key(model_name: str, template_id: str, rendered_prompt: str) -> str:
    """SHA-256 hex digest over the documented NUL-joined byte layout."""
    if not (model_name and template_id and rendered_prompt):
        raise ValueError("cache_key fields must be non-empty")
    blob = b"\x00".join(
        part.encode("utf-8") for part in (model_name, template_id, rendered_prompt)
    )
    return hashlib.sha256(blob).hexdigest()


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ResponseCache:
    """One JSON file per key; atomic writes; misses return None."""

    def __init__(self, cache_dir: str | Path):
        self.root = Path(cache_dir)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        try:
            record = json.loads(path.read_text("utf-8"))
        except FileNotFoundError:
            return None
        return record["response"]

    def put(self, key: str, request: dict, response: str) -> None:
        record = {"key": key, "request": request, "response": response}
        payload = json.dumps(record, ensure_ascii=False, sort_keys=True)
        fd, tmp_name = tempfile.mkstemp(dir=self.root, prefix=key[:16] + ".")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp_name, self._path(key))
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise


class JudgeClient:
    """Prompt completion against the configured backend, with cache and retries."""

    def __init__(self, config: JudgeConfig):
        self.config = config
        self.cache = ResponseCache(config.cache_dir) if config.cache_dir else None
        self.request_count = 0

    # -- transport ---------------------------------------------------------

    def _post_http(self, prompt: str) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        headers.update(self.config.extra_headers)
        payload = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0.0,
        }
        response = requests.post(
            self.config.base_url,
            json=payload,
            headers=headers,
            timeout=self.config.timeout_s,
        )
        response.raise_for_status()
        data = response.json()
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise JudgeError(f"unexpected response shape: {data!r}") from exc

    def _complete_http(self, prompt: str) -> str:
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                self.request_count += 1
                return self._post_http(prompt)
            except JudgeError:
                raise
            except Exception as exc:  # network / HTTP-status failures
                last_error = exc
                if attempt < self.config.max_retries:
                    time.sleep(self.config.retry_backoff_s * 2**attempt)
        raise JudgeError(
            f"backend unreachable after {self.config.max_retries + 1} attempts: "
            f"{last_error}"
        ) from last_error

    def complete(self, template_id: str, prompt: str) -> str:
        """Return the raw model answer for a rendered prompt (cache-first)."""
        if self.config.backend == BACKEND_MOCK:
            raise JudgeError("mock backend does not use prompt completion")
        key = cache_key(self.config.model_name, template_id, prompt)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
        answer = self._complete_http(prompt)
        if self.cache is not None:
            request = {
                "model": self.config.model_name,
                "template_id": template_id,
                "prompt": prompt,
            }
            self.cache.put(key, request, answer)
        return answer

    # -- parsing -----------------------------------------------------------

    @staticmethod
    def _parse_extraction(answer: str, aspect: str) -> list[Element]:
        elements = []
        for line in answer.splitlines():
            text = line.strip().lstrip("-*").strip()
            if text:
                elements.append(Element(text=text, aspect=aspect))
        return elements

    @staticmethod
    def _parse_entailment(answer: str) -> bool | None:
        token = answer.strip().rstrip(".").strip().upper()
        if token == "ENTAILED":
            return True
        if token == "NOT_ENTAILED":
            return False
        return None


def extract_elements(
    caption: str, aspect: str, config: JudgeConfig, client: JudgeClient | None = None
) -> ExtractionResult:
    """Extract atomic elements from a caption, capped at ``config.element_cap``."""
    if not caption.strip():
        raise ValueError("caption must be non-empty")
    if aspect not in ("object", "event"):
        raise ValueError(f"unknown aspect {aspect!r}")
    if config.backend == BACKEND_MOCK:
        texts = _mock.mock_extract(caption, aspect)
        elements = [Element(text=t, aspect=aspect) for t in texts]
    else:
        client = client or JudgeClient(config)
        template_id = templates.extraction_template_id(aspect)
        prompt = templates.render_extraction_prompt(caption, aspect)
        answer = client.complete(template_id, prompt)
        elements = JudgeClient._parse_extraction(answer, aspect)
    truncated = len(elements) > config.element_cap
    return ExtractionResult(
        elements=tuple(elements[: config.element_cap]), truncated=truncated
    )


def judge_entailment(
    description: str,
    element: Element,
    config: JudgeConfig,
    client: JudgeClient | None = None,
) -> JudgeVerdict:
    """Decide whether ``description`` entails ``element``."""
    if not description.strip():
        raise ValueError("description must be non-empty")
    if config.backend == BACKEND_MOCK:
        entailed = _mock.mock_entailed(description, element.text)
        raw = "ENTAILED" if entailed else "NOT_ENTAILED"
    else:
        client = client or JudgeClient(config)
        prompt = templates.render_entailment_prompt(description, element.text)
        raw = client.complete(templates.ENTAILMENT_TEMPLATE_ID, prompt)
        parsed = JudgeClient._parse_entailment(raw)
        if parsed is None:
            # one strict reprompt, then give up rather than coerce
            raw = client.complete(
                templates.ENTAILMENT_TEMPLATE_ID, prompt + templates.STRICT_REMINDER
            )
            parsed = JudgeClient._parse_entailment(raw)
            if parsed is None:
                raise JudgeError(f"ambiguous entailment answer: {raw!r}")
        entailed = parsed
    return JudgeVerdict(
        description_hash=content_hash(description),
        element=element,
        entailed=entailed,
        raw_response=raw,
    )


def run_bounded(
    tasks: Sequence[Callable[[], T]], max_in_flight: int
) -> list[T]:
    """Run callables with at most ``max_in_flight`` outstanding; results come
    back in input order regardless of completion order."""
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be >= 1")
    if not tasks:
        return []
    if max_in_flight == 1 or len(tasks) == 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [future.result() for future in futures]


def judge_entailments(
    pairs: Iterable[tuple[str, Element]],
    config: JudgeConfig,
    client: JudgeClient | None = None,
) -> list[JudgeVerdict]:
    """Batch entailment in deterministic input order through the bounded pool."""
    pairs = list(pairs)
    client = client or (JudgeClient(config) if config.backend == BACKEND_HTTP else None)
    tasks = [
        (lambda d=description, e=element: judge_entailment(d, e, config, client))
        for description, element in pairs
    ]
    return run_bounded(tasks, config.max_in_flight)
