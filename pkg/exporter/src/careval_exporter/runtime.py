"""Model runtime interface and the deterministic stub used in tests.

A real deployment implements :class:`ModelRuntime` against whatever serving
stack hosts the model; the exporter never imports an inference framework
itself. ``generate`` answers a prompt about a video; ``hidden_state_embed``
returns the hidden state of the next-token step as the embedding vector.
"""

from __future__ import annotations

import hashlib
import struct
from typing import Protocol, Sequence


class RuntimeFailure(RuntimeError):
    """A single input failed inside the runtime."""


class ModelRuntime(Protocol):
    def generate(
        self, prompt: str, video_uri: str, frame_times_s: Sequence[float]
    ) -> str:
        """Caption the video sampled at the given timestamps."""
        ...

    def hidden_state_embed(
        self,
        prompt: str,
        video_uri: str | None = None,
        frame_times_s: Sequence[float] | None = None,
    ) -> Sequence[float]:
        """Embedding taken from the next-token hidden state for this prompt."""
        ...


class StubRuntime:
    """Deterministic stand-in: canned captions, hash-derived embeddings.

    Identical inputs always produce identical outputs, so exports are
    byte-reproducible. ``fail_uris`` injects per-video failures.
    """

    def __init__(
        self,
        dim: int = 4,
        canned_caption: str = "A person performs an activity in a room.",
        fail_uris: set[str] | None = None,
    ):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.canned_caption = canned_caption
        self.fail_uris = fail_uris or set()

    def _check(self, video_uri: str | None) -> None:
        if video_uri is not None and video_uri in self.fail_uris:
            raise RuntimeFailure(f"video unreachable: {video_uri}")

    def generate(
        self, prompt: str, video_uri: str, frame_times_s: Sequence[float]
    ) -> str:
        self._check(video_uri)
        return f"{self.canned_caption} [source {video_uri}]"

    def hidden_state_embed(
        self,
        prompt: str,
        video_uri: str | None = None,
        frame_times_s: Sequence[float] | None = None,
    ) -> list[float]:
        self._check(video_uri)
        material = prompt if video_uri is None else f"{video_uri}\x00{prompt}"
        vector = []
        counter = 0
        while len(vector) < self.dim:
            digest = hashlib.sha256(f"{material}\x00{counter}".encode()).digest()
            for offset in range(0, len(digest) - 3, 4):
                (word,) = struct.unpack_from("<I", digest, offset)
                vector.append(word / 2**31 - 1.0)
                if len(vector) == self.dim:
                    break
            counter += 1
        return vector
