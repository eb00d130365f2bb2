"""Text similarity metrics: ROUGE-1/2/L, corpus BLEU, and embedding cosine.

All metrics tokenize with the shared rule from :mod:`slidetutor.embedding`
and report on the [0, 1] scale (multiply by 100 for display). BLEU is
corpus-level with n-gram orders 1-4, uniform weights, add-one smoothing on
both sides of each modified precision, and orders without any candidate
n-gram dropped from the geometric mean; short texts would otherwise pin
the score to zero.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embedding import EmbeddingProvider, normalize, tokenize
from .errors import EmptyReferenceError, EmptyTextError, LengthMismatchError

BLEU_MAX_ORDER = 4


@dataclass
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def zero(cls) -> "RougeScore":
        return cls(0.0, 0.0, 0.0)


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """N-gram multiset overlap (n = 1 or 2).

    P = overlap / candidate n-grams, R = overlap / reference n-grams,
    F1 their harmonic mean; an empty candidate scores all zeros.

    Raises:
        EmptyReferenceError: reference has no tokens.
        ValueError: unsupported n.
    """
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    ref_tokens = tokenize(reference)
    if not ref_tokens:
        raise EmptyReferenceError("reference is empty after tokenization")
    cand_tokens = tokenize(candidate)
    cand_grams = _ngrams(cand_tokens, n)
    ref_grams = _ngrams(ref_tokens, n)
    overlap = sum((cand_grams & ref_grams).values())
    cand_total = sum(cand_grams.values())
    ref_total = sum(ref_grams.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Two-row dynamic program; metric texts are short.
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """Longest-common-subsequence overlap over token sequences.

    P = LCS / candidate length, R = LCS / reference length, F1 their
    harmonic mean; an empty candidate scores all zeros.

    Raises:
        EmptyReferenceError: reference has no tokens.
    """
    ref_tokens = tokenize(reference)
    if not ref_tokens:
        raise EmptyReferenceError("reference is empty after tokenization")
    cand_tokens = tokenize(candidate)
    if not cand_tokens:
        return RougeScore.zero()
    lcs = _lcs_length(cand_tokens, ref_tokens)
    precision = lcs / len(cand_tokens)
    recall = lcs / len(ref_tokens)
    return RougeScore(precision, recall, _f1(precision, recall))


def bleu(candidates: Sequence[str], references: Sequence[str]) -> float:
    """Corpus-level smoothed BLEU in [0, 1].

    Clipped and total n-gram counts aggregate across the corpus per order;
    each modified precision is (clipped + 1) / (total + 1); orders with no
    candidate n-grams are skipped; brevity penalty is exp(1 - r/c) when
    the candidate corpus is shorter than the reference corpus.

    Raises:
        LengthMismatchError: lists differ in length or are empty.
        EmptyReferenceError: a reference has no tokens.
    """
    if len(candidates) != len(references) or not candidates:
        raise LengthMismatchError(
            f"need equal nonzero counts, got {len(candidates)} candidates "
            f"and {len(references)} references"
        )
    clipped = [0] * BLEU_MAX_ORDER
    totals = [0] * BLEU_MAX_ORDER
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        ref_tokens = tokenize(ref)
        if not ref_tokens:
            raise EmptyReferenceError("a reference is empty after tokenization")
        cand_tokens = tokenize(cand)
        cand_len += len(cand_tokens)
        ref_len += len(ref_tokens)
        for order in range(1, BLEU_MAX_ORDER + 1):
            cand_grams = _ngrams(cand_tokens, order)
            ref_grams = _ngrams(ref_tokens, order)
            clipped[order - 1] += sum((cand_grams & ref_grams).values())
            totals[order - 1] += sum(cand_grams.values())
    if cand_len == 0:
        return 0.0
    log_precisions = [
        math.log((clipped[i] + 1) / (totals[i] + 1))
        for i in range(BLEU_MAX_ORDER)
        if totals[i] > 0
    ]
    if not log_precisions:
        return 0.0
    geometric_mean = math.exp(sum(log_precisions) / len(log_precisions))
    brevity = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * geometric_mean


def cosine_metric(a: str, b: str, embedder: EmbeddingProvider) -> float:
    """Dot product of the normalized embeddings of ``a`` and ``b``.

    Raises:
        EmptyTextError: either text has no tokens.
    """
    if not tokenize(a) or not tokenize(b):
        raise EmptyTextError("both texts must tokenize nonempty")
    va = normalize(embedder.embed(a)).astype(np.float64)
    vb = normalize(embedder.embed(b)).astype(np.float64)
    return float(va @ vb)
