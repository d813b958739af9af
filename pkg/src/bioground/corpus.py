"""Corpus and topic ingestion for line-delimited abstract records."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator


class CorpusError(Exception):
    """Base error for corpus/topic ingestion problems."""


class ParseError(CorpusError):
    """A line could not be parsed; message names the file, line and field."""


class IngestionError(CorpusError):
    """A structurally valid file violates a corpus invariant (e.g. duplicate id)."""


@dataclass(frozen=True)
class Document:
    """One abstract: opaque identifier, title and ordered sentence list."""

    doc_id: str
    title: str
    sentences: tuple[str, ...]

    def __post_init__(self):
        if not self.doc_id:
            raise IngestionError("document has empty doc_id")
        if not self.sentences:
            raise IngestionError(f"document {self.doc_id!r} has no sentences")
        if any(not s.strip() for s in self.sentences):
            raise IngestionError(f"document {self.doc_id!r} has an empty sentence")

    def text(self) -> str:
        """Title and all sentences joined with single spaces."""
        return " ".join((self.title, *self.sentences)) if self.title else " ".join(self.sentences)


@dataclass(frozen=True)
class GroundingTopic:
    """Grounding input: question, fixed answer sentence, prior document ids."""

    topic_id: str
    question: str
    answer_sentence: str
    old_ids: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.question:
            raise IngestionError(f"topic {self.topic_id!r}: empty question")
        if not self.answer_sentence:
            raise IngestionError(f"topic {self.topic_id!r}: empty answer_sentence")


@dataclass(frozen=True)
class AttributionTopic:
    """Attribution input: question plus optional topic label and narrative."""

    topic_id: str
    question: str
    topic_label: str = ""
    narrative: str = ""

    def __post_init__(self):
        if not self.question:
            raise IngestionError(f"topic {self.topic_id!r}: empty question")


class Label(str, Enum):
    SUPPORT = "SUPPORT"
    CONTRADICT = "CONTRADICT"


@dataclass(frozen=True)
class EvidenceLabel:
    topic_id: str
    doc_id: str
    label: Label


class Corpus:
    """Immutable collection of documents keyed by doc_id."""

    def __init__(self, documents: list[Document]):
        self._by_id: dict[str, Document] = {}
        for doc in documents:
            if doc.doc_id in self._by_id:
                raise IngestionError(f"duplicate doc_id {doc.doc_id!r}")
            self._by_id[doc.doc_id] = doc

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[Document]:
        return iter(self._by_id.values())

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def get(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    @property
    def doc_ids(self) -> list[str]:
        return list(self._by_id)


def _iter_records(path: str) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed record: {exc}") from exc
            if not isinstance(record, dict):
                raise ParseError(f"{path}:{lineno}: record is not an object")
            yield lineno, record


def _require(record: dict, name: str, path: str, lineno: int):
    if name not in record:
        raise ParseError(f"{path}:{lineno}: missing required field {name!r}")
    return record[name]


def load_corpus(path: str) -> Corpus:
    """Load a corpus file: one record per line with doc_id, title, abstract."""
    documents = []
    seen: set[str] = set()
    for lineno, record in _iter_records(path):
        doc_id = str(_require(record, "doc_id", path, lineno))
        if doc_id in seen:
            raise IngestionError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        title = str(_require(record, "title", path, lineno))
        abstract = _require(record, "abstract", path, lineno)
        if not isinstance(abstract, list) or not all(isinstance(s, str) for s in abstract):
            raise ParseError(f"{path}:{lineno}: field 'abstract' must be an array of strings")
        documents.append(Document(doc_id=doc_id, title=title, sentences=tuple(abstract)))
    return Corpus(documents)


def save_corpus(corpus: Corpus, path: str) -> None:
    """Write a corpus back in the same line-delimited format (round-trip safe)."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus:
            record = {"doc_id": doc.doc_id, "title": doc.title, "abstract": list(doc.sentences)}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_grounding_topics(path: str) -> list[GroundingTopic]:
    topics = []
    for lineno, record in _iter_records(path):
        topics.append(
            GroundingTopic(
                topic_id=str(_require(record, "topic_id", path, lineno)),
                question=str(_require(record, "question", path, lineno)),
                answer_sentence=str(_require(record, "answer_sentence", path, lineno)),
                old_ids=frozenset(str(i) for i in record.get("old_ids", [])),
            )
        )
    return topics


def load_attribution_topics(path: str) -> list[AttributionTopic]:
    topics = []
    for lineno, record in _iter_records(path):
        topics.append(
            AttributionTopic(
                topic_id=str(_require(record, "topic_id", path, lineno)),
                question=str(_require(record, "question", path, lineno)),
                topic_label=str(record.get("topic_label", "")),
                narrative=str(record.get("narrative", "")),
            )
        )
    return topics


def load_gold_labels(path: str) -> list[EvidenceLabel]:
    labels = []
    for lineno, record in _iter_records(path):
        raw = str(_require(record, "label", path, lineno))
        try:
            label = Label(raw)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: label must be SUPPORT or CONTRADICT, got {raw!r}") from exc
        labels.append(
            EvidenceLabel(
                topic_id=str(_require(record, "topic_id", path, lineno)),
                doc_id=str(_require(record, "doc_id", path, lineno)),
                label=label,
            )
        )
    return labels


_TERMINATORS = ".!?"


def segment_sentences(text: str) -> list[str]:
    """Split raw text into sentences.

    Boundaries are `.`, `!` or `?` followed by whitespace and an uppercase
    letter, or end of text.  A period preceded by a lone letter (an initial)
    or sitting inside a decimal number is not a boundary.  Whitespace runs
    collapse to single spaces; non-whitespace characters are preserved.
    """
    normalized = " ".join(text.split())
    if not normalized:
        return []
    sentences = []
    start = 0
    for i, ch in enumerate(normalized):
        if ch not in _TERMINATORS:
            continue
        at_end = i == len(normalized) - 1
        followed = (
            i + 2 < len(normalized)
            and normalized[i + 1] == " "
            and normalized[i + 2].isupper()
        )
        if not (at_end or followed):
            continue
        if ch == ".":
            # "J. Smith": the token before the period is a single letter.
            prev = normalized[i - 1] if i > 0 else ""
            before_prev = normalized[i - 2] if i > 1 else " "
            if prev.isalpha() and before_prev == " ":
                continue
        sentence = normalized[start : i + 1].strip()
        if sentence:
            sentences.append(sentence)
        start = i + 1
    tail = normalized[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences
