"""End-to-end retrieval evaluation and the reranker ablation.

Every corpus record supplies (question, answer) as (query, reference); the
pipeline's answer for the question is scored against the reference. ROUGE
and cosine aggregate as macro-averages over records, BLEU is computed
corpus-level, matching the usual convention for each metric family.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .corpus import Corpus
from .embedding import EmbeddingProvider, tokenize
from .errors import EmptyQueryError, SlidetutorError
from .index import FlatIndex
from .metrics import RougeScore, bleu, cosine_metric, rouge_l, rouge_n
from .pipeline import PipelineConfig, retrieve
from .rerank import PairScorer


@dataclass
class MetricReport:
    """Aggregate metrics for one pipeline configuration."""

    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    bleu: float
    cosine: float
    n_examples: int
    config_label: str


def _mean_rouge(scores: list[RougeScore]) -> RougeScore:
    n = len(scores)
    return RougeScore(
        precision=sum(s.precision for s in scores) / n,
        recall=sum(s.recall for s in scores) / n,
        f1=sum(s.f1 for s in scores) / n,
    )


def run_eval(
    corpus: Corpus,
    cfg: PipelineConfig,
    index: FlatIndex,
    embedder: EmbeddingProvider,
    scorer: PairScorer,
) -> MetricReport:
    """Evaluate the pipeline over every record of ``corpus``.

    Raises:
        EmptyQueryError: a record has no usable question; the record is named.
        SlidetutorError: pipeline errors propagate with the record id prefixed.
    """
    predictions: list[str] = []
    references: list[str] = []
    rouge1_scores: list[RougeScore] = []
    rouge2_scores: list[RougeScore] = []
    rougeL_scores: list[RougeScore] = []
    cosines: list[float] = []

    for rec in corpus.records:
        question = rec.question_text or ""
        if not tokenize(question):
            raise EmptyQueryError(f"record {rec.doc_id!r} has no usable question")
        try:
            response = retrieve(question, cfg, index, corpus, embedder, scorer)
        except SlidetutorError as exc:
            raise type(exc)(f"record {rec.doc_id!r}: {exc}") from exc
        prediction = response.answer_text
        reference = rec.answer_text
        predictions.append(prediction)
        references.append(reference)
        rouge1_scores.append(rouge_n(prediction, reference, 1))
        rouge2_scores.append(rouge_n(prediction, reference, 2))
        rougeL_scores.append(rouge_l(prediction, reference))
        cosines.append(cosine_metric(prediction, reference, embedder))

    scorer_name = getattr(scorer, "name", type(scorer).__name__)
    return MetricReport(
        rouge1=_mean_rouge(rouge1_scores),
        rouge2=_mean_rouge(rouge2_scores),
        rougeL=_mean_rouge(rougeL_scores),
        bleu=bleu(predictions, references),
        cosine=sum(cosines) / len(cosines),
        n_examples=len(predictions),
        config_label=f"{cfg.label()} scorer={scorer_name}",
    )


def run_ablation(
    corpus: Corpus,
    cfg: PipelineConfig,
    index: FlatIndex,
    embedder: EmbeddingProvider,
    scorer: PairScorer,
) -> tuple[MetricReport, MetricReport]:
    """Evaluate with and without the reranking stage, all else equal.

    Returns (with_rerank, without_rerank) reports.
    """
    with_cfg = replace(cfg, rerank_enabled=True)
    without_cfg = replace(cfg, rerank_enabled=False)
    return (
        run_eval(corpus, with_cfg, index, embedder, scorer),
        run_eval(corpus, without_cfg, index, embedder, scorer),
    )
