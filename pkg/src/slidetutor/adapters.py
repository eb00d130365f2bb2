"""HTTP adapters for external embedding, scoring, generation, and TTS.

Wire contracts (all JSON over POST unless noted):

* embedder:  ``{"text": str}`` -> ``{"vector": [float, ...]}``
* scorer:    ``{"input": "<query> [SEP] <candidate>"}`` -> ``{"score": num}``
* generator: ``{"query": str, "context": str}`` -> ``{"text": str}``
* TTS:       ``{"text": str}`` -> WAV bytes

Each adapter maps transport and shape problems to its module's failure
error so callers can decide whether to degrade or propagate.
"""

from __future__ import annotations

import numpy as np
import requests

from .errors import (
    EmbedderFailureError,
    GeneratorFailureError,
    ScorerFailureError,
    TtsFailureError,
)
from .rerank import format_pair

DEFAULT_TIMEOUT_SECONDS = 10.0


class ExternalEmbedder:
    """EmbeddingProvider backed by an HTTP embedding service."""

    name = "external"

    def __init__(
        self, url: str, dimension: int, timeout: float = DEFAULT_TIMEOUT_SECONDS
    ) -> None:
        if dimension <= 0:
            raise ValueError(f"dimension must be positive, got {dimension}")
        self.url = url
        self._dimension = dimension
        self.timeout = timeout

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed(self, text: str) -> np.ndarray:
        try:
            response = requests.post(
                self.url, json={"text": text}, timeout=self.timeout
            )
            response.raise_for_status()
            vector = response.json()["vector"]
        except Exception as exc:
            raise EmbedderFailureError(f"embedding service failed: {exc}") from exc
        arr = np.asarray(vector, dtype=np.float32)
        if arr.ndim != 1 or arr.shape[0] != self._dimension:
            raise EmbedderFailureError(
                f"embedding service returned shape {arr.shape}, "
                f"expected ({self._dimension},)"
            )
        return arr


class ExternalScorer:
    """PairScorer backed by an HTTP cross-encoder style service.

    The request body carries the exact pair format string, so the
    query/candidate contract stays observable on the wire.
    """

    name = "external"

    def __init__(self, url: str, timeout: float = DEFAULT_TIMEOUT_SECONDS) -> None:
        self.url = url
        self.timeout = timeout

    def score(self, query: str, candidate: str) -> float:
        payload = {"input": format_pair(query, candidate)}
        try:
            response = requests.post(self.url, json=payload, timeout=self.timeout)
            response.raise_for_status()
            return float(response.json()["score"])
        except Exception as exc:
            raise ScorerFailureError(f"scoring service failed: {exc}") from exc


class ExternalGenerator:
    """GeneratorAdapter backed by an HTTP rewriting service."""

    name = "external"

    def __init__(self, url: str, timeout: float = DEFAULT_TIMEOUT_SECONDS) -> None:
        self.url = url
        self.timeout = timeout

    def generate(self, query: str, context: str) -> str:
        try:
            response = requests.post(
                self.url,
                json={"query": query, "context": context},
                timeout=self.timeout,
            )
            response.raise_for_status()
            text = response.json()["text"]
        except Exception as exc:
            raise GeneratorFailureError(f"generator service failed: {exc}") from exc
        if not isinstance(text, str):
            raise GeneratorFailureError("generator service returned non-text")
        return text


class ExternalTts:
    """Text-to-speech boundary; returns WAV bytes from the external service."""

    name = "external"

    def __init__(self, url: str, timeout: float = DEFAULT_TIMEOUT_SECONDS) -> None:
        self.url = url
        self.timeout = timeout

    def synthesize(self, text: str) -> bytes:
        try:
            response = requests.post(self.url, json={"text": text}, timeout=self.timeout)
            response.raise_for_status()
            return response.content
        except Exception as exc:
            raise TtsFailureError(f"tts service failed: {exc}") from exc
