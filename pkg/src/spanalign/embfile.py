"""Binary embedding file format shared with external encoder bridges.

Layout (little-endian throughout):

    magic   4 bytes  b"EMB1"
    version u32      currently 1
    unit    u8       0 = line, 1 = token
    normalized u8    1 if every row is L2-normalized
    count   u32      number of rows
    dim     u32      vector dimensionality
    model_tag  u16 length + UTF-8 bytes
    doc_id     u16 length + UTF-8 bytes
    body    count * dim float32 values, row-major

Identical byte layout on every platform; the reader checks the magic,
version and body length.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"EMB1"
VERSION = 1
_UNITS = ("line", "token")


class EmbeddingFileError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Unit-normalized vectors for the lines or tokens of one document side."""

    unit: str
    vectors: np.ndarray  # (count, dim) float32
    doc_id: str = ""
    model_tag: str = ""

    def __post_init__(self) -> None:
        if self.unit not in _UNITS:
            raise ValueError(f"unit must be one of {_UNITS}, got {self.unit!r}")
        if self.vectors.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {self.vectors.shape}")

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def check_normalized(self, tol: float = 1e-5) -> None:
        if self.count == 0:
            return
        norms = np.linalg.norm(self.vectors, axis=1)
        worst = float(np.max(np.abs(norms - 1.0)))
        if worst > tol:
            raise EmbeddingFileError(f"rows are not unit-normalized (max deviation {worst:.2e})")


def write_embedding_file(path, matrix: EmbeddingMatrix, normalized: bool = True) -> None:
    data = matrix.vectors.astype("<f4", copy=False)
    model_tag = matrix.model_tag.encode("utf-8")
    doc_id = matrix.doc_id.encode("utf-8")
    header = MAGIC + struct.pack(
        "<IBBII",
        VERSION,
        _UNITS.index(matrix.unit),
        1 if normalized else 0,
        matrix.count,
        matrix.dim,
    )
    header += struct.pack("<H", len(model_tag)) + model_tag
    header += struct.pack("<H", len(doc_id)) + doc_id
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes(order="C"))


def read_embedding_file(path) -> EmbeddingMatrix:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise EmbeddingFileError(f"{path}: not an embedding file (bad magic)")
    try:
        version, unit_code, normalized, count, dim = struct.unpack_from("<IBBII", blob, 4)
        offset = 4 + struct.calcsize("<IBBII")
        (tag_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        model_tag = blob[offset : offset + tag_len].decode("utf-8")
        offset += tag_len
        (id_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        doc_id = blob[offset : offset + id_len].decode("utf-8")
        offset += id_len
    except (struct.error, UnicodeDecodeError) as exc:
        raise EmbeddingFileError(f"{path}: truncated or corrupt header") from exc
    if version != VERSION:
        raise EmbeddingFileError(f"{path}: unsupported version {version}")
    if unit_code >= len(_UNITS):
        raise EmbeddingFileError(f"{path}: unknown unit code {unit_code}")
    expected = count * dim * 4
    body = blob[offset:]
    if len(body) != expected:
        raise EmbeddingFileError(f"{path}: body holds {len(body)} bytes, header promises {expected}")
    vectors = np.frombuffer(body, dtype="<f4").reshape(count, dim)
    matrix = EmbeddingMatrix(unit=_UNITS[unit_code], vectors=vectors, doc_id=doc_id, model_tag=model_tag)
    if normalized:
        matrix.check_normalized()
    return matrix
