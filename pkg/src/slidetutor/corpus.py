"""Course corpus loading, validation, and index construction.

A corpus directory holds:

* ``course.json`` — ``{"course_id": str, "title": str}``;
* ``qa.jsonl`` — one record per line:
  ``{"id", "week", "slide", "question", "answer", "qtype"}``;
* ``transcripts.jsonl`` — ``{"week", "slide", "text"}`` per line;
* slide images at ``weeks/week_{NN}/slide_{MM}.png`` (two-digit numbers).

All files are UTF-8; unknown JSON fields are ignored for forward
compatibility. The retrieval index embeds answer texts only; questions are
evaluation queries and transcripts attach to slides, not to QA pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .embedding import EmbeddingProvider
from .errors import (
    DanglingImageRefError,
    DuplicateIdError,
    EmbedFailureError,
    EmptyCorpusError,
    MissingFileError,
    SchemaViolationError,
)
from .index import FlatIndex

QUESTION_TYPES = frozenset({"closed", "open", "summarization", "classification"})

COURSE_FILE = "course.json"
QA_FILE = "qa.jsonl"
TRANSCRIPTS_FILE = "transcripts.jsonl"


def image_relpath(week: int, slide: int) -> str:
    """Canonical slide image path relative to the corpus root."""
    return f"weeks/week_{week:02d}/slide_{slide:02d}.png"


@dataclass
class DocumentRecord:
    """One answer unit: the retrieval target plus its slide metadata."""

    doc_id: str
    week: int
    slide: int
    answer_text: str
    question_text: str | None
    qtype: str
    transcript_text: str | None
    image_ref: str


@dataclass
class Corpus:
    course_id: str
    title: str
    records: list[DocumentRecord]
    root_dir: Path
    by_id: dict[str, DocumentRecord] = field(init=False)

    def __post_init__(self) -> None:
        self.by_id = {rec.doc_id: rec for rec in self.records}

    def __len__(self) -> int:
        return len(self.records)

    def weeks(self) -> list[int]:
        return sorted({rec.week for rec in self.records})

    def slides(self, week: int) -> list[DocumentRecord]:
        """First record per slide of ``week``, ascending by slide number."""
        seen: dict[int, DocumentRecord] = {}
        for rec in self.records:
            if rec.week == week and rec.slide not in seen:
                seen[rec.slide] = rec
        return [seen[s] for s in sorted(seen)]

    def transcript(self, week: int, slide: int) -> str | None:
        for rec in self.records:
            if rec.week == week and rec.slide == slide:
                return rec.transcript_text
        return None

    def image_path(self, week: int, slide: int) -> Path:
        return self.root_dir / image_relpath(week, slide)

    def answer_texts(self) -> dict[str, str]:
        return {rec.doc_id: rec.answer_text for rec in self.records}


@dataclass
class ValidationIssue:
    kind: str
    message: str


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolationError(
                    f"{path.name}:{lineno}: invalid JSON: {exc}"
                ) from exc
            if not isinstance(obj, dict):
                raise SchemaViolationError(
                    f"{path.name}:{lineno}: expected an object, got {type(obj).__name__}"
                )
            yield lineno, obj


def _require(obj: dict, key: str, kind: type, where: str):
    if key not in obj:
        raise SchemaViolationError(f"{where}: missing {key!r} field")
    value = obj[key]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaViolationError(f"{where}: {key!r} must be an integer")
    elif not isinstance(value, kind):
        raise SchemaViolationError(f"{where}: {key!r} must be {kind.__name__}")
    return value


def load_corpus(root_dir: str | Path, strict: bool = True) -> Corpus:
    """Parse, cross-reference, and validate a corpus directory.

    Record ordering follows ``qa.jsonl`` file order. With ``strict`` (the
    default) a missing slide image raises DanglingImageRefError; pass
    ``strict=False`` to load anyway and report problems via
    :func:`validate`.

    Raises:
        MissingFileError: a required file is absent.
        SchemaViolationError: malformed line (message carries the line number).
        DuplicateIdError: repeated doc_id in ``qa.jsonl``.
        DanglingImageRefError: strict mode, slide image file absent.
    """
    root = Path(root_dir)
    for name in (COURSE_FILE, QA_FILE, TRANSCRIPTS_FILE):
        if not (root / name).is_file():
            raise MissingFileError(f"missing {name} in {root}")

    try:
        course = json.loads((root / COURSE_FILE).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolationError(f"{COURSE_FILE}: invalid JSON: {exc}") from exc
    if not isinstance(course, dict):
        raise SchemaViolationError(f"{COURSE_FILE}: expected an object")
    course_id = _require(course, "course_id", str, COURSE_FILE)
    title = _require(course, "title", str, COURSE_FILE)

    transcripts: dict[tuple[int, int], str] = {}
    for lineno, obj in _read_jsonl(root / TRANSCRIPTS_FILE):
        where = f"{TRANSCRIPTS_FILE}:{lineno}"
        week = _require(obj, "week", int, where)
        slide = _require(obj, "slide", int, where)
        text = _require(obj, "text", str, where)
        if week < 1 or slide < 1:
            raise SchemaViolationError(f"{where}: week and slide must be >= 1")
        if (week, slide) in transcripts:
            raise SchemaViolationError(
                f"{where}: duplicate transcript for week {week} slide {slide}"
            )
        transcripts[(week, slide)] = text

    records: list[DocumentRecord] = []
    seen_ids: set[str] = set()
    for lineno, obj in _read_jsonl(root / QA_FILE):
        where = f"{QA_FILE}:{lineno}"
        doc_id = _require(obj, "id", str, where)
        week = _require(obj, "week", int, where)
        slide = _require(obj, "slide", int, where)
        answer = _require(obj, "answer", str, where)
        qtype = _require(obj, "qtype", str, where)
        question = obj.get("question")
        if question is not None and not isinstance(question, str):
            raise SchemaViolationError(f"{where}: 'question' must be a string")
        if not doc_id:
            raise SchemaViolationError(f"{where}: 'id' must be nonempty")
        if week < 1 or slide < 1:
            raise SchemaViolationError(f"{where}: week and slide must be >= 1")
        if qtype not in QUESTION_TYPES:
            raise SchemaViolationError(
                f"{where}: qtype {qtype!r} not one of {sorted(QUESTION_TYPES)}"
            )
        if doc_id in seen_ids:
            raise DuplicateIdError(f"{where}: duplicate id {doc_id!r}")
        seen_ids.add(doc_id)

        image_ref = image_relpath(week, slide)
        if strict and not (root / image_ref).is_file():
            raise DanglingImageRefError(
                f"{where}: record {doc_id!r} references missing image {image_ref}"
            )
        records.append(
            DocumentRecord(
                doc_id=doc_id,
                week=week,
                slide=slide,
                answer_text=answer,
                question_text=question,
                qtype=qtype,
                transcript_text=transcripts.get((week, slide)),
                image_ref=image_ref,
            )
        )

    return Corpus(course_id=course_id, title=title, records=records, root_dir=root)


def validate(corpus: Corpus) -> list[ValidationIssue]:
    """Report consistency problems without mutating anything.

    Checks: dangling image refs, slides lacking a transcript, and answers
    that are empty after tokenization. An empty list means a clean corpus.
    """
    issues: list[ValidationIssue] = []
    seen_slides: set[tuple[int, int]] = set()
    for rec in corpus.records:
        if not (corpus.root_dir / rec.image_ref).is_file():
            issues.append(
                ValidationIssue(
                    kind="dangling_image_ref",
                    message=f"record {rec.doc_id!r}: missing image {rec.image_ref}",
                )
            )
        key = (rec.week, rec.slide)
        if key not in seen_slides:
            seen_slides.add(key)
            if rec.transcript_text is None:
                issues.append(
                    ValidationIssue(
                        kind="missing_transcript",
                        message=f"week {rec.week} slide {rec.slide} has no transcript",
                    )
                )
        if not rec.answer_text.strip():
            issues.append(
                ValidationIssue(
                    kind="empty_answer",
                    message=f"record {rec.doc_id!r} has an empty answer",
                )
            )
    return issues


def build_index(corpus: Corpus, embedder: EmbeddingProvider) -> FlatIndex:
    """Embed every answer text into a finalized FlatIndex, in corpus order.

    Raises:
        EmptyCorpusError: corpus holds no records.
        EmbedFailureError: a record's answer cannot be embedded; the
            message names the record.
    """
    if not corpus.records:
        raise EmptyCorpusError("corpus holds no records")
    idx = FlatIndex(embedder.dimension)
    for rec in corpus.records:
        try:
            vector = embedder.embed(rec.answer_text)
        except Exception as exc:
            raise EmbedFailureError(f"record {rec.doc_id!r}: {exc}") from exc
        idx.add(rec.doc_id, vector)
    return idx.finalize()
