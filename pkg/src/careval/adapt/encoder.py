"""Toy trainable text encoder and vocabulary-projection analysis.

The encoder is deliberately small: a token embedding table, mean pooling
over token instances, and a square projection. Tokenization lowercases and
splits on anything outside ``[a-z0-9]``; unknown tokens map to the reserved
``<unk>`` slot at index 0, and a text with no tokens at all pools to the
``<unk>`` row alone.

Checkpoint format (little-endian):

    bytes 0..7    magic ``CAREENC1``
    bytes 8..11   uint32 V (vocab size, including ``<unk>``)
    bytes 12..15  uint32 d (embedding width)
    bytes 16..19  uint32 L (byte length of the vocab block)
    bytes 20..    vocab block: V tokens joined by ``\\n``, UTF-8
    then          V*d float64 token table, row-major
    then          d*d float64 projection, row-major
"""

from __future__ import annotations

import os
import re
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

CHECKPOINT_MAGIC = b"CAREENC1"
_CKPT_HEADER = struct.Struct("<8sIII")

UNK_TOKEN = "<unk>"
UNK_INDEX = 0

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class CheckpointFormatError(ValueError):
    """Raised for malformed encoder checkpoint files."""


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def build_vocab(texts: Iterable[str]) -> dict[str, int]:
    """Token -> index map over all texts, with ``<unk>`` reserved at 0."""
    tokens = sorted({tok for text in texts for tok in tokenize(text)})
    vocab = {UNK_TOKEN: UNK_INDEX}
    for index, token in enumerate(tokens, start=1):
        vocab[token] = index
    return vocab


@dataclass
class ToyEncoder:
    vocab: dict[str, int]
    token_table: np.ndarray
    projection: np.ndarray

    def __post_init__(self):
        self.token_table = np.asarray(self.token_table, dtype=np.float64)
        self.projection = np.asarray(self.projection, dtype=np.float64)
        v, d = self.token_table.shape
        if self.projection.shape != (d, d):
            raise ValueError("projection must be d x d")
        if len(self.vocab) != v:
            raise ValueError(f"{len(self.vocab)} vocab entries for {v} table rows")
        indices = sorted(self.vocab.values())
        if indices != list(range(v)):
            raise ValueError("vocab indices must cover [0, V) exactly")
        if not (np.isfinite(self.token_table).all() and np.isfinite(self.projection).all()):
            raise ValueError("encoder parameters must be finite")

    @property
    def dim(self) -> int:
        return self.token_table.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.token_table.shape[0]

    def token_indices(self, text: str) -> list[int]:
        return [self.vocab.get(tok, UNK_INDEX) for tok in tokenize(text)]

    def ordered_vocab(self) -> list[str]:
        return [tok for tok, _ in sorted(self.vocab.items(), key=lambda kv: kv[1])]


def pool(encoder: ToyEncoder, text: str) -> tuple[np.ndarray, list[int]]:
    """Mean of token-table rows (with multiplicity) and the indices used."""
    indices = encoder.token_indices(text)
    if not indices:
        indices = [UNK_INDEX]
    pooled = encoder.token_table[indices].mean(axis=0)
    return pooled, indices


def encode(encoder: ToyEncoder, text: str) -> np.ndarray:
    """projection @ mean(token rows); deterministic, order-free."""
    pooled, _ = pool(encoder, text)
    return encoder.projection @ pooled


def save_encoder(encoder: ToyEncoder, path: str | Path) -> None:
    path = Path(path)
    vocab_blob = "\n".join(encoder.ordered_vocab()).encode("utf-8")
    header = _CKPT_HEADER.pack(
        CHECKPOINT_MAGIC, encoder.vocab_size, encoder.dim, len(vocab_blob)
    )
    payload = (
        header
        + vocab_blob
        + encoder.token_table.astype("<f8").tobytes(order="C")
        + encoder.projection.astype("<f8").tobytes(order="C")
    )
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def load_encoder(path: str | Path) -> ToyEncoder:
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _CKPT_HEADER.size:
        raise CheckpointFormatError(f"{path}: file shorter than header")
    magic, v, d, vocab_len = _CKPT_HEADER.unpack_from(blob)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic {magic!r}")
    expected = _CKPT_HEADER.size + vocab_len + v * d * 8 + d * d * 8
    if len(blob) != expected:
        raise CheckpointFormatError(
            f"{path}: size mismatch: expected {expected} bytes, found {len(blob)}"
        )
    offset = _CKPT_HEADER.size
    tokens = blob[offset : offset + vocab_len].decode("utf-8").split("\n")
    if len(tokens) != v:
        raise CheckpointFormatError(f"{path}: {len(tokens)} vocab tokens for V={v}")
    offset += vocab_len
    token_table = np.frombuffer(blob, dtype="<f8", count=v * d, offset=offset)
    offset += v * d * 8
    projection = np.frombuffer(blob, dtype="<f8", count=d * d, offset=offset)
    vocab = {tok: i for i, tok in enumerate(tokens)}
    return ToyEncoder(
        vocab=vocab,
        token_table=token_table.reshape(v, d).copy(),
        projection=projection.reshape(d, d).copy(),
    )


@dataclass(frozen=True)
class VocabProjection:
    """Maps embedding space to vocabulary space: logits = matrix @ embedding."""

    matrix: np.ndarray
    vocab: tuple[str, ...]

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "vocab", tuple(self.vocab))
        if matrix.ndim != 2 or matrix.shape[0] != len(self.vocab):
            raise ValueError("projection matrix must have one row per vocab token")


def vocab_projection(encoder: ToyEncoder) -> VocabProjection:
    """Head mapping embedding space back to vocabulary space.

    Row t is the encoder's own embedding of the single token t (its table row
    pushed through the projection), so a logit is the dot product between the
    query embedding and that token's embedding."""
    return VocabProjection(
        matrix=encoder.token_table @ encoder.projection.T,
        vocab=tuple(encoder.ordered_vocab()),
    )


def topk_tokens(
    embedding: Sequence[float] | np.ndarray, proj: VocabProjection, k: int
) -> list[tuple[str, float]]:
    """Top-k vocabulary tokens by logit; ties broken by ascending vocab index."""
    embedding = np.asarray(embedding, dtype=np.float64)
    v = len(proj.vocab)
    if not 1 <= k <= v:
        raise ValueError(f"k must be in [1, {v}]")
    if embedding.shape != (proj.matrix.shape[1],):
        raise ValueError(
            f"dimension mismatch: embedding {embedding.shape}, "
            f"projection expects ({proj.matrix.shape[1]},)"
        )
    logits = proj.matrix @ embedding
    order = sorted(range(v), key=lambda i: (-logits[i], i))
    return [(proj.vocab[i], float(logits[i])) for i in order[:k]]
