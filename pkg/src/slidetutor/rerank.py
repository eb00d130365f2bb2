"""Second-stage reranking over stage-I candidates.

Candidates are paired with the query as ``"<query> [SEP] <candidate>"``,
scored through a pluggable :class:`PairScorer`, and re-sorted by that
score. The shipped scorer is a deterministic lexical token-set F1; an
HTTP adapter for external cross-encoder services lives in
:mod:`slidetutor.adapters`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Protocol, runtime_checkable

from .embedding import tokenize
from .errors import EmptyTextError, MissingDocumentError, ScorerFailureError
from .index import Candidate

SEP_TOKEN = "[SEP]"


@runtime_checkable
class PairScorer(Protocol):
    """(query, candidate text) -> finite relevance score, deterministic."""

    name: str

    def score(self, query: str, candidate: str) -> float: ...


def format_pair(query: str, candidate: str) -> str:
    """Join query and candidate with the literal pair separator.

    Raises:
        EmptyTextError: either side is empty.
    """
    if not query or not candidate:
        raise EmptyTextError("query and candidate must both be nonempty")
    return f"{query} {SEP_TOKEN} {candidate}"


def lexical_score(query: str, candidate: str) -> float:
    """Token-set F1 between query and candidate, in [0, 1].

    Tokens follow the shared tokenization rule with duplicates removed;
    P = overlap/|candidate tokens|, R = overlap/|query tokens|,
    F1 = 2PR/(P+R), and 0.0 when the overlap is empty.

    Raises:
        EmptyTextError: either side has no tokens.
    """
    query_tokens = set(tokenize(query))
    cand_tokens = set(tokenize(candidate))
    if not query_tokens or not cand_tokens:
        raise EmptyTextError("query and candidate must both tokenize nonempty")
    overlap = len(query_tokens & cand_tokens)
    if overlap == 0:
        return 0.0
    precision = overlap / len(cand_tokens)
    recall = overlap / len(query_tokens)
    return 2 * precision * recall / (precision + recall)


class LexicalScorer:
    """Reference :class:`PairScorer` built on :func:`lexical_score`."""

    name = "lexical"

    def score(self, query: str, candidate: str) -> float:
        return lexical_score(query, candidate)


@dataclass
class RankedResult:
    """Candidates re-sorted by stage-II score under the documented tie rule."""

    query: str
    ranked: list[Candidate]


def rerank(
    query: str,
    candidates: list[Candidate],
    texts: Mapping[str, str],
    scorer: PairScorer,
) -> RankedResult:
    """Score every candidate and sort by stage-II score descending.

    The output is a permutation of the input (fresh Candidate objects, the
    input list is left untouched). Ties break by stage-I score descending,
    then doc_id ascending.

    Raises:
        ValueError: empty candidate list.
        MissingDocumentError: a doc_id has no text in ``texts``.
        ScorerFailureError: the scorer raised; the candidate is named.
    """
    if not candidates:
        raise ValueError("candidates must be nonempty")
    scored: list[Candidate] = []
    for cand in candidates:
        if cand.doc_id not in texts:
            raise MissingDocumentError(f"no text for doc_id {cand.doc_id!r}")
        try:
            score = float(scorer.score(query, texts[cand.doc_id]))
        except ScorerFailureError:
            raise
        except Exception as exc:
            raise ScorerFailureError(
                f"scorer failed on candidate {cand.doc_id!r}: {exc}"
            ) from exc
        if not math.isfinite(score):
            raise ScorerFailureError(
                f"scorer returned non-finite score for {cand.doc_id!r}: {score!r}"
            )
        scored.append(replace(cand, stage2_score=score))
    scored.sort(key=lambda c: (-c.stage2_score, -c.stage1_score, c.doc_id))
    return RankedResult(query=query, ranked=scored)
