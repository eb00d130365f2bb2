"""Two-stage retrieval question answering for slide-based courses.

The library embeds answer texts as deterministic unit vectors, retrieves
by exact inner product, reranks with a pluggable pair scorer, and serves
the result through a REST API with user management; an evaluation harness
scores the pipeline with ROUGE, BLEU, and embedding cosine.
"""

__version__ = "0.1.0"

from .corpus import Corpus, DocumentRecord, build_index, load_corpus, validate
from .embedding import (
    DEFAULT_DIMENSION,
    EmbeddingProvider,
    HashingEmbedder,
    hash_embed,
    normalize,
    tokenize,
)
from .evalharness import MetricReport, run_ablation, run_eval
from .index import Candidate, FlatIndex
from .metrics import RougeScore, bleu, cosine_metric, rouge_l, rouge_n
from .pipeline import (
    PassthroughGenerator,
    PipelineConfig,
    RetrievalResponse,
    retrieve,
    truncate_input,
)
from .rerank import LexicalScorer, RankedResult, format_pair, lexical_score, rerank

__all__ = [
    "Candidate",
    "Corpus",
    "DEFAULT_DIMENSION",
    "DocumentRecord",
    "EmbeddingProvider",
    "FlatIndex",
    "HashingEmbedder",
    "LexicalScorer",
    "MetricReport",
    "PassthroughGenerator",
    "PipelineConfig",
    "RankedResult",
    "RetrievalResponse",
    "RougeScore",
    "bleu",
    "build_index",
    "cosine_metric",
    "format_pair",
    "hash_embed",
    "lexical_score",
    "load_corpus",
    "normalize",
    "rerank",
    "retrieve",
    "rouge_l",
    "rouge_n",
    "run_ablation",
    "run_eval",
    "tokenize",
    "truncate_input",
    "validate",
]
