"""Shared fixtures: corpus directories on disk and service clients."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from slidetutor.config import load_config
from slidetutor.corpus import build_index, load_corpus
from slidetutor.embedding import HashingEmbedder

# Valid 1x1 PNG, enough for image round-trip checks.
TINY_PNG = bytes.fromhex(
    "89504e470d0a1a0a0000000d4948445200000001000000010802000000907753de"
    "0000000c4944415408d763f8ffff3f0003fe02fea7356a290000000049454e44ae"
    "426082"
)

# 20 distinct QA pairs across 2 weeks x 5 slides; answers share few tokens
# so exact self-retrieval is unambiguous.
TOY_QA = [
    ("gradient descent updates parameters along the negative gradient direction",
     "how does gradient descent update parameters"),
    ("a convolutional layer slides learned filters across the image grid",
     "what does a convolutional layer do"),
    ("dropout randomly zeroes activations during training to reduce overfitting",
     "why use dropout during training"),
    ("backpropagation applies the chain rule to compute weight gradients",
     "how are weight gradients computed"),
    ("a learning rate controls the step size of each optimization update",
     "what controls optimization step size"),
    ("batch normalization rescales layer inputs using minibatch statistics",
     "what does batch normalization rescale"),
    ("an embedding maps discrete symbols into continuous vector space",
     "what maps symbols into vectors"),
    ("attention weighs encoder states by relevance to the current decoding step",
     "how does attention weigh encoder states"),
    ("max pooling keeps the strongest response within each spatial window",
     "what does max pooling keep"),
    ("a recurrent cell carries hidden state across sequence positions",
     "what carries hidden state across a sequence"),
    ("softmax turns raw scores into a probability distribution over classes",
     "what turns scores into probabilities"),
    ("cross entropy penalizes confident wrong predictions heavily",
     "which loss penalizes confident mistakes"),
    ("weight decay shrinks parameters toward zero as regularization",
     "what shrinks parameters toward zero"),
    ("early stopping halts training when validation error rises",
     "when does early stopping halt training"),
    ("data augmentation enlarges the training set with label preserving transforms",
     "how can the training set be enlarged"),
    ("transfer learning reuses features learned on a source task",
     "what reuses features from a source task"),
    ("a residual connection adds the block input to its output",
     "what does a residual connection add"),
    ("tokenization splits raw text into model readable units",
     "what splits raw text into units"),
    ("beam search keeps several partial hypotheses during decoding",
     "what keeps several hypotheses while decoding"),
    ("a validation split estimates generalization during development",
     "what estimates generalization during development"),
]


# Ablation fixture: the two dx_* answers repeat one query token, so their
# hashed term-frequency vectors dominate stage I for the paired t_* queries
# while token-set F1 prefers the true answers. Stage I misranks exactly
# those two queries; reranking corrects both.
ABLATION_QA = [
    {"id": "t_cnn", "question": "cnn cnn cnn cnn what is",
     "answer": "what is a cnn a network for images"},
    {"id": "dx_cnn", "question": "cnn cnn cnn",
     "answer": "cnn cnn cnn cnn cnn cnn cnn cnn"},
    {"id": "t_rnn", "question": "rnn rnn rnn rnn how does",
     "answer": "how does a rnn a model for sequences"},
    {"id": "dx_rnn", "question": "rnn rnn rnn",
     "answer": "rnn rnn rnn rnn rnn rnn rnn rnn"},
    {"id": "n1", "question": "how gradient descent updates parameters",
     "answer": "gradient descent updates parameters along negative slope direction"},
    {"id": "n2", "question": "why use dropout during training",
     "answer": "dropout randomly zeroes activations during training against overfitting"},
    {"id": "n3", "question": "where weight gradients come from",
     "answer": "backpropagation computes weight gradients via chain rule"},
    {"id": "n4", "question": "purpose batch normalization layer inputs",
     "answer": "batch normalization rescales layer inputs using minibatch statistics"},
    {"id": "n5", "question": "role attention encoder states",
     "answer": "attention weighs encoder states by decoding relevance"},
    {"id": "n6", "question": "max pooling spatial window response",
     "answer": "max pooling keeps strongest response per spatial window"},
]


def ablation_rows() -> list[dict]:
    rows = []
    for i, entry in enumerate(ABLATION_QA):
        rows.append(
            {
                "id": entry["id"],
                "week": 1,
                "slide": 1 + i % 5,
                "question": entry["question"],
                "answer": entry["answer"],
                "qtype": "open",
            }
        )
    return rows


def write_corpus(
    root: Path,
    qa_rows: list[dict],
    transcripts: list[dict] | None = None,
    course_id: str = "ml101",
    title: str = "Machine Learning",
    images: bool = True,
) -> Path:
    """Materialize a corpus directory; returns its path."""
    root.mkdir(parents=True, exist_ok=True)
    (root / "course.json").write_text(
        json.dumps({"course_id": course_id, "title": title}), encoding="utf-8"
    )
    (root / "qa.jsonl").write_text(
        "".join(json.dumps(row) + "\n" for row in qa_rows), encoding="utf-8"
    )
    transcripts = transcripts if transcripts is not None else []
    (root / "transcripts.jsonl").write_text(
        "".join(json.dumps(row) + "\n" for row in transcripts), encoding="utf-8"
    )
    if images:
        for row in qa_rows:
            img = root / "weeks" / f"week_{row['week']:02d}" / (
                f"slide_{row['slide']:02d}.png"
            )
            img.parent.mkdir(parents=True, exist_ok=True)
            img.write_bytes(TINY_PNG)
    return root


def toy_qa_rows() -> list[dict]:
    rows = []
    for i, (answer, question) in enumerate(TOY_QA):
        week = 1 + i // 10
        slide = 1 + (i % 10) // 2
        rows.append(
            {
                "id": f"d{i:02d}",
                "week": week,
                "slide": slide,
                "question": question,
                "answer": answer,
                "qtype": ["closed", "open", "summarization", "classification"][i % 4],
            }
        )
    return rows


def toy_transcripts() -> list[dict]:
    rows = toy_qa_rows()
    slides = sorted({(r["week"], r["slide"]) for r in rows})
    return [
        {"week": w, "slide": s, "text": f"transcript for week {w} slide {s}"}
        for w, s in slides
    ]


@pytest.fixture
def toy_corpus_dir(tmp_path: Path) -> Path:
    return write_corpus(tmp_path / "corpus", toy_qa_rows(), toy_transcripts())


@pytest.fixture
def toy_corpus(toy_corpus_dir: Path):
    return load_corpus(toy_corpus_dir)


@pytest.fixture
def toy_index(toy_corpus):
    return build_index(toy_corpus, HashingEmbedder(256))


def make_service_config(
    tmp_path: Path, corpus_dir: Path, index_dir: Path, **overrides
):
    """AppConfig pointing at the given fixtures with a fresh database."""
    cfg = load_config(None)
    cfg.corpus_dir = str(corpus_dir)
    cfg.index_path = str(index_dir)
    cfg.db_path = str(tmp_path / "users.db")
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg
