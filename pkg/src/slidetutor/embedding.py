"""Deterministic text embeddings and unit-vector normalization.

Vectors are plain 1-D ``numpy.float32`` arrays. The reference embedder is
signed feature hashing over FNV-1a 64 token hashes; the exact rule is fixed
so that any independent implementation produces bit-identical vectors:

* tokenize: lowercase the text, then take maximal runs of alphanumeric
  characters (``str.isalnum``) as tokens;
* for each token, ``h`` = FNV-1a 64-bit hash of its UTF-8 bytes;
* bucket = ``h mod d``; sign = +1 when the most significant bit of ``h``
  is 0, else -1; add ``sign`` per occurrence;
* normalize the resulting term-frequency vector to unit Euclidean norm.

Real embedding services plug in behind :class:`EmbeddingProvider`; nothing
in the core depends on one.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from .errors import EmptyTextError, ZeroVectorError

DEFAULT_DIMENSION = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric run.

    A token is a maximal run of characters for which ``str.isalnum`` holds.
    This single rule is shared by the embedder, the lexical scorer, and the
    text metrics so that all reported numbers are reproducible.
    """
    lowered = text.lower()
    return "".join(ch if ch.isalnum() else " " for ch in lowered).split()


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash, the bucket/sign source for feature hashing."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def normalize(v: np.ndarray) -> np.ndarray:
    """Return ``v / ||v||`` as float32; direction is preserved.

    Raises:
        ZeroVectorError: all entries are zero (norm undefined).
    """
    arr = np.asarray(v, dtype=np.float32)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector contains NaN or Inf")
    norm = float(np.linalg.norm(arr.astype(np.float64)))
    if norm == 0.0:
        raise ZeroVectorError("cannot normalize an all-zero vector")
    return (arr.astype(np.float64) / norm).astype(np.float32)


def hash_embed(text: str, dimension: int = DEFAULT_DIMENSION) -> np.ndarray:
    """Embed ``text`` as a signed hashed term-frequency unit vector.

    Raises:
        EmptyTextError: no tokens survive tokenization.
        ValueError: non-positive dimension.
    """
    if dimension <= 0:
        raise ValueError(f"dimension must be positive, got {dimension}")
    tokens = tokenize(text)
    if not tokens:
        raise EmptyTextError("no tokens survive tokenization")
    vec = np.zeros(dimension, dtype=np.float64)
    for token in tokens:
        h = fnv1a64(token.encode("utf-8"))
        sign = 1.0 if (h >> 63) == 0 else -1.0
        vec[h % dimension] += sign
    return normalize(vec.astype(np.float32))


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Text-to-vector capability with a declared output dimension.

    Implementations must be deterministic (identical text yields identical
    vectors) and safe for concurrent use from multiple request handlers.
    """

    @property
    def dimension(self) -> int: ...

    def embed(self, text: str) -> np.ndarray: ...


class HashingEmbedder:
    """Reference :class:`EmbeddingProvider` built on :func:`hash_embed`."""

    name = "hash"

    def __init__(self, dimension: int = DEFAULT_DIMENSION) -> None:
        if dimension <= 0:
            raise ValueError(f"dimension must be positive, got {dimension}")
        self._dimension = dimension

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed(self, text: str) -> np.ndarray:
        return hash_embed(text, self._dimension)
