"""Embedding matrices: the CAREEMB1 binary format, normalization, cosine similarity.

CAREEMB1 data file layout (little-endian throughout):

    bytes 0..7    magic ``CAREEMB1``
    bytes 8..11   uint32 N (rows)
    bytes 12..15  uint32 D (columns)
    bytes 16..    N*D IEEE-754 float32 values, row-major

Row ids live in a sidecar UTF-8 text file, one id per line, in row order.
Values are stored in single precision; every similarity or metric
computation converts to double precision first, so results do not depend
on accumulation order at the tolerances used downstream.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"CAREEMB1"
_HEADER = struct.Struct("<8sII")


class EmbeddingFormatError(ValueError):
    """Raised for malformed CAREEMB1 files or inconsistent sidecars."""


@dataclass(frozen=True)
class EmbeddingMatrix:
    """N ids paired with an N x D float32 matrix."""

    ids: tuple[str, ...]
    data: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "ids", tuple(self.ids))
        if data.ndim != 2:
            raise ValueError("embedding data must be a 2-D matrix")
        n, d = data.shape
        if n < 1 or d < 1:
            raise ValueError("embedding matrix must be at least 1x1")
        if len(self.ids) != n:
            raise ValueError(f"{len(self.ids)} ids for {n} rows")
        if len(set(self.ids)) != n:
            raise ValueError("embedding ids must be unique")
        if not np.isfinite(data).all():
            raise ValueError("embedding matrix contains non-finite values")
        if self.normalized:
            norms = np.linalg.norm(data.astype(np.float64), axis=1)
            if np.abs(norms - 1.0).max() > 1e-6:
                raise ValueError("normalized flag set but rows are not unit length")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SimilarityMatrix:
    """Cosine similarities between two id-labelled embedding sets (float64)."""

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.shape != (len(self.rows), len(self.cols)):
            raise ValueError("similarity matrix shape does not match id lists")
        if not np.isfinite(values).all():
            raise ValueError("similarity matrix contains non-finite values")
        if values.size and (values.min() < -1 - 1e-9 or values.max() > 1 + 1e-9):
            raise ValueError("cosine similarities outside [-1, 1]")


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def write_embeddings(
    matrix: EmbeddingMatrix, data_path: str | Path, ids_path: str | Path
) -> None:
    """Write the data file and ids sidecar atomically (temp file + rename)."""
    data_path, ids_path = Path(data_path), Path(ids_path)
    n, d = matrix.data.shape
    header = _HEADER.pack(MAGIC, n, d)
    payload = matrix.data.astype("<f4", copy=False).tobytes(order="C")
    _atomic_write(data_path, header + payload)
    ids_blob = "".join(f"{row_id}\n" for row_id in matrix.ids).encode("utf-8")
    _atomic_write(ids_path, ids_blob)


def read_embeddings(data_path: str | Path, ids_path: str | Path) -> EmbeddingMatrix:
    """Read a CAREEMB1 file plus sidecar; byte-exact inverse of write_embeddings."""
    data_path, ids_path = Path(data_path), Path(ids_path)
    blob = data_path.read_bytes()
    if len(blob) < _HEADER.size:
        raise EmbeddingFormatError(f"{data_path}: file shorter than header")
    magic, n, d = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise EmbeddingFormatError(f"{data_path}: bad magic {magic!r}")
    expected = _HEADER.size + n * d * 4
    if len(blob) != expected:
        raise EmbeddingFormatError(
            f"{data_path}: payload size mismatch: header says {n}x{d}"
            f" ({expected} bytes total), file has {len(blob)} bytes"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(n, d)
    if not np.isfinite(data).all():
        raise EmbeddingFormatError(f"{data_path}: non-finite value in payload")
    ids = ids_path.read_text(encoding="utf-8").splitlines()
    if len(ids) != n:
        raise EmbeddingFormatError(
            f"{ids_path}: {len(ids)} ids for {n} matrix rows"
        )
    return EmbeddingMatrix(ids=tuple(ids), data=data.copy())


def l2_normalize(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Divide every row by its Euclidean norm (computed in double precision)."""
    data = matrix.data.astype(np.float64)
    norms = np.linalg.norm(data, axis=1)
    zero_rows = np.nonzero(norms == 0.0)[0]
    if zero_rows.size:
        raise ValueError(
            f"zero-norm embedding row for id {matrix.ids[zero_rows[0]]!r}"
        )
    normalized = (data / norms[:, None]).astype(np.float32)
    return replace(matrix, data=normalized, normalized=True)


def _unit_rows(matrix: EmbeddingMatrix) -> np.ndarray:
    # norms accumulate in float64 straight from the float32 storage, and the
    # broadcast divide upcasts in the same pass; avoids two full-size
    # temporaries, which dominates at 1000x4096 scale
    norms = np.sqrt(np.einsum("ij,ij->i", matrix.data, matrix.data, dtype=np.float64))
    zero_rows = np.nonzero(norms == 0.0)[0]
    if zero_rows.size:
        raise ValueError(
            f"zero-norm embedding row for id {matrix.ids[zero_rows[0]]!r}"
        )
    return matrix.data / norms[:, None]


def similarity_matrix(
    queries: EmbeddingMatrix, gallery: EmbeddingMatrix
) -> SimilarityMatrix:
    """Cosine similarity of every query row against every gallery row."""
    if queries.dim != gallery.dim:
        raise ValueError(
            f"dimension mismatch: queries D={queries.dim}, gallery D={gallery.dim}"
        )
    values = _unit_rows(queries) @ _unit_rows(gallery).T
    np.clip(values, -1.0, 1.0, out=values)
    return SimilarityMatrix(rows=queries.ids, cols=gallery.ids, values=values)


def from_rows(ids: Sequence[str], rows: Sequence[Sequence[float]]) -> EmbeddingMatrix:
    """Convenience constructor from plain Python lists."""
    return EmbeddingMatrix(ids=tuple(ids), data=np.asarray(rows, dtype=np.float32))
