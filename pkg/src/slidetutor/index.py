"""Exact inner-product flat index over unit-normalized vectors.

The first retrieval stage: every stored vector is normalized on insertion,
search is an exhaustive dot product against all rows (no approximation),
and results are totally ordered so repeated runs are reproducible.

On-disk format (bit-exact, see :meth:`FlatIndex.save`):

* ``manifest.json`` — UTF-8 JSON object
  ``{"version": 1, "dimension": int, "count": int, "ids": [str, ...]}``
  with ids in insertion order;
* ``vectors.bin`` — count x dimension IEEE-754 little-endian float32,
  row-major, row ``i`` belongs to ``ids[i]``; no header, no padding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import embedding
from .errors import (
    CorruptManifestError,
    DimensionMismatchError,
    DuplicateIdError,
    EmptyIndexError,
    IndexFinalizedError,
    IndexNotFinalizedError,
    IoFailureError,
)

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
VECTORS_NAME = "vectors.bin"


@dataclass
class Candidate:
    """One retrieval hit: stage-I similarity, optionally a rerank score."""

    doc_id: str
    stage1_score: float
    stage2_score: float | None = None


class FlatIndex:
    """Append-only store of (doc_id, unit vector) rows with exact search.

    Build phase is single-writer; after :meth:`finalize` the index is
    immutable and safe for concurrent search.
    """

    def __init__(self, dimension: int) -> None:
        if dimension <= 0:
            raise ValueError(f"dimension must be positive, got {dimension}")
        self.dimension = dimension
        self._ids: list[str] = []
        self._id_set: set[str] = set()
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None
        self.finalized = False

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> list[str]:
        return list(self._ids)

    def add(self, doc_id: str, vector: np.ndarray) -> None:
        """Normalize ``vector`` and append it under ``doc_id``.

        Raises:
            IndexFinalizedError: index already finalized.
            DuplicateIdError: doc_id already present.
            DimensionMismatchError: vector length differs from the index.
            ZeroVectorError: vector has no nonzero entry.
        """
        if self.finalized:
            raise IndexFinalizedError("cannot add to a finalized index")
        if doc_id in self._id_set:
            raise DuplicateIdError(f"doc_id already present: {doc_id!r}")
        arr = np.asarray(vector, dtype=np.float32)
        if arr.ndim != 1 or arr.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"vector has dimension {arr.shape}, index expects {self.dimension}"
            )
        unit = embedding.normalize(arr)
        self._ids.append(doc_id)
        self._id_set.add(doc_id)
        self._rows.append(unit)

    def finalize(self) -> "FlatIndex":
        """Freeze the index; search and save require this."""
        if not self.finalized:
            self._matrix = (
                np.vstack(self._rows)
                if self._rows
                else np.zeros((0, self.dimension), dtype=np.float32)
            )
            self.finalized = True
        return self

    def vector_for(self, position: int) -> np.ndarray:
        """Stored (normalized) row at ``position``, as float32."""
        if self._matrix is not None:
            return self._matrix[position]
        return self._rows[position]

    def search(self, query: np.ndarray, k: int = 10) -> list[Candidate]:
        """Top-``k`` rows by dot product with ``query``, exactly.

        Scores accumulate in float64 even though storage is float32. Ties
        break by ascending insertion order, then ascending doc_id, so the
        result order is total and deterministic.

        Raises:
            IndexNotFinalizedError: index not finalized.
            EmptyIndexError: index holds no vectors.
            DimensionMismatchError: query length differs from the index.
        """
        if not self.finalized or self._matrix is None:
            raise IndexNotFinalizedError("finalize the index before searching")
        if len(self._ids) == 0:
            raise EmptyIndexError("index holds no vectors")
        if k <= 0:
            raise ValueError(f"k must be positive, got {k}")
        q = np.asarray(query, dtype=np.float64)
        if q.ndim != 1 or q.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"query has dimension {q.shape}, index expects {self.dimension}"
            )
        scores = self._matrix.astype(np.float64) @ q
        order = sorted(
            range(len(self._ids)),
            key=lambda i: (-scores[i], i, self._ids[i]),
        )
        return [
            Candidate(doc_id=self._ids[i], stage1_score=float(scores[i]))
            for i in order[: min(k, len(order))]
        ]

    def save(self, path: str | Path) -> None:
        """Write ``manifest.json`` and ``vectors.bin`` into directory ``path``.

        Raises:
            IndexNotFinalizedError: index not finalized.
            IoFailureError: the directory cannot be written.
        """
        if not self.finalized or self._matrix is None:
            raise IndexNotFinalizedError("finalize the index before saving")
        directory = Path(path)
        try:
            directory.mkdir(parents=True, exist_ok=True)
            manifest = {
                "version": FORMAT_VERSION,
                "dimension": self.dimension,
                "count": len(self._ids),
                "ids": self._ids,
            }
            (directory / MANIFEST_NAME).write_text(
                json.dumps(manifest), encoding="utf-8"
            )
            little = self._matrix.astype("<f4", copy=False)
            (directory / VECTORS_NAME).write_bytes(little.tobytes(order="C"))
        except OSError as exc:
            raise IoFailureError(f"cannot write index to {directory}: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "FlatIndex":
        """Load an index saved by :meth:`save`; the round trip is bit-exact.

        Raises:
            IoFailureError: files missing or unreadable.
            CorruptManifestError: version, count, or file size mismatch.
        """
        directory = Path(path)
        try:
            manifest_raw = (directory / MANIFEST_NAME).read_text(encoding="utf-8")
            blob = (directory / VECTORS_NAME).read_bytes()
        except OSError as exc:
            raise IoFailureError(f"cannot read index from {directory}: {exc}") from exc
        try:
            manifest = json.loads(manifest_raw)
        except json.JSONDecodeError as exc:
            raise CorruptManifestError(f"manifest is not valid JSON: {exc}") from exc

        version = manifest.get("version")
        if version != FORMAT_VERSION:
            raise CorruptManifestError(
                f"unsupported format version {version!r}, expected {FORMAT_VERSION}"
            )
        dimension = manifest.get("dimension")
        count = manifest.get("count")
        ids = manifest.get("ids")
        if not isinstance(dimension, int) or dimension <= 0:
            raise CorruptManifestError(f"bad dimension: {dimension!r}")
        if not isinstance(count, int) or count < 0:
            raise CorruptManifestError(f"bad count: {count!r}")
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise CorruptManifestError("ids must be a list of strings")
        if len(ids) != count:
            raise CorruptManifestError(
                f"manifest count={count} but ids holds {len(ids)} entries"
            )
        if len(set(ids)) != len(ids):
            raise CorruptManifestError("duplicate ids in manifest")
        expected_bytes = count * dimension * 4
        if len(blob) != expected_bytes:
            raise CorruptManifestError(
                f"vectors file holds {len(blob)} bytes, expected {expected_bytes}"
            )

        index = cls(dimension)
        matrix = np.frombuffer(blob, dtype="<f4").reshape(count, dimension)
        index._ids = list(ids)
        index._id_set = set(ids)
        index._rows = [matrix[i].copy() for i in range(count)]
        index.finalize()
        return index
