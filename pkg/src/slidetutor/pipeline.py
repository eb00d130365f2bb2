"""Two-stage retrieval orchestration.

``retrieve`` truncates the query to the configured character budget, embeds
and normalizes it, takes the stage-I top-k by inner product, optionally
reranks with a pair scorer, and resolves slide metadata for the winner.
Generation is an optional adapter; the passthrough default returns the
retrieved answer verbatim, and a failing generator degrades back to
passthrough instead of failing the request.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

from . import embedding as emb
from .corpus import Corpus
from .errors import EmptyQueryError
from .index import Candidate, FlatIndex
from .rerank import PairScorer, rerank


@runtime_checkable
class GeneratorAdapter(Protocol):
    """(query, retrieved context) -> answer text."""

    name: str

    def generate(self, query: str, context: str) -> str: ...


class PassthroughGenerator:
    """Returns the retrieved answer verbatim."""

    name = "passthrough"

    def generate(self, query: str, context: str) -> str:
        return context


@dataclass
class PipelineConfig:
    k: int = 10
    rerank_enabled: bool = True
    max_input_chars: int = 2048
    generator: GeneratorAdapter = field(default_factory=PassthroughGenerator)
    final_n: int = 1

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.max_input_chars <= 0:
            raise ValueError(
                f"max_input_chars must be positive, got {self.max_input_chars}"
            )
        if not 0 < self.final_n <= self.k:
            raise ValueError(
                f"final_n must be in [1, k={self.k}], got {self.final_n}"
            )

    def label(self) -> str:
        mode = "with-rerank" if self.rerank_enabled else "no-rerank"
        return f"{mode} k={self.k}"


@dataclass
class RetrievalResponse:
    """Final answer plus the (possibly reranked) candidate list."""

    query_used: str
    best: Candidate
    candidates: list[Candidate]
    answer_text: str
    week: int
    slide: int
    image_ref: str
    degraded: bool = False


def truncate_input(text: str, max_chars: int) -> str:
    """Clamp ``text`` to at most ``max_chars`` characters on a token boundary.

    Texts within the budget pass through unchanged. Longer texts are cut at
    ``max_chars``; if the cut lands inside a token the trailing partial
    token is dropped, and trailing whitespace is stripped. Never raises on
    long input (a fully consumed text comes back empty).
    """
    if max_chars <= 0:
        raise ValueError(f"max_chars must be positive, got {max_chars}")
    if len(text) <= max_chars:
        return text
    cut = text[:max_chars]
    if text[max_chars].isalnum() and cut and cut[-1].isalnum():
        # Cut landed mid-token: drop the partial token.
        end = len(cut)
        while end > 0 and cut[end - 1].isalnum():
            end -= 1
        cut = cut[:end]
    return cut.rstrip()


def retrieve(
    query: str,
    cfg: PipelineConfig,
    index: FlatIndex,
    corpus: Corpus,
    embedder: emb.EmbeddingProvider,
    scorer: PairScorer,
) -> RetrievalResponse:
    """Run the two-stage flow for one query.

    Raises:
        EmptyQueryError: query empty after truncation and tokenization.
        EmptyIndexError: index holds no vectors.
        ScorerFailureError: rerank enabled and the scorer failed.
        MissingDocumentError: a candidate id is absent from the corpus.
    """
    query_used = truncate_input(query, cfg.max_input_chars)
    if not emb.tokenize(query_used):
        raise EmptyQueryError("query is empty after truncation and tokenization")

    vector = emb.normalize(embedder.embed(query_used))
    candidates = index.search(vector, cfg.k)

    if cfg.rerank_enabled:
        candidates = rerank(
            query_used, candidates, corpus.answer_texts(), scorer
        ).ranked

    final = candidates[: cfg.final_n]
    best = final[0]
    record = corpus.by_id.get(best.doc_id)
    if record is None:
        raise KeyError(f"index returned unknown doc_id {best.doc_id!r}")

    degraded = False
    try:
        answer_text = cfg.generator.generate(query_used, record.answer_text)
    except Exception:
        # A teaching session should not dead-end on a generator outage.
        answer_text = record.answer_text
        degraded = True

    return RetrievalResponse(
        query_used=query_used,
        best=best,
        candidates=final,
        answer_text=answer_text,
        week=record.week,
        slide=record.slide,
        image_ref=record.image_ref,
        degraded=degraded,
    )
