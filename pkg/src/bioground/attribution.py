"""Attribution engine: narrative-aware retrieval, prompt assembly, citation parsing."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources

import requests

from .corpus import AttributionTopic, Corpus, segment_sentences
from .lexindex import InvertedIndex, RankedCandidate, bm25_search
from .scorers import BackendError, Reranker

CONTEXT_SIZE = 10
STAGE1_DEPTH = 1000
MAX_WORDS = 250
MAX_CITATIONS = 3

UNCITED = "uncited-sentence"
TOO_MANY = "too-many-citations"
UNKNOWN_INDEX = "unknown-index"
WORD_LIMIT = "word-limit"
EMPTY_ANSWER = "empty-answer"

_CITATION_RE = re.compile(r"\[(\d+(?:\s*,\s*\d+)*)\]")


class TemplateError(Exception):
    pass


class ReplayError(Exception):
    pass


@dataclass(frozen=True)
class PromptTemplates:
    constraints: str
    exemplar: str

    @classmethod
    def default(cls) -> "PromptTemplates":
        data = resources.files("bioground.data")
        return cls(
            constraints=data.joinpath("prompt_constraints.txt").read_text("utf-8"),
            exemplar=data.joinpath("prompt_exemplar.txt").read_text("utf-8"),
        )

    @classmethod
    def from_files(cls, constraints_path: str, exemplar_path: str) -> "PromptTemplates":
        try:
            with open(constraints_path, encoding="utf-8") as fh:
                constraints = fh.read()
            with open(exemplar_path, encoding="utf-8") as fh:
                exemplar = fh.read()
        except OSError as exc:
            raise TemplateError(str(exc)) from exc
        return cls(constraints=constraints, exemplar=exemplar)


@dataclass(frozen=True)
class PromptBundle:
    constraints_block: str
    exemplar_block: str
    evidence_block: str
    context_block: str
    assembled_text: str
    evidence_map: dict[int, str]  # local citation index -> doc_id


@dataclass(frozen=True)
class AnswerSentence:
    text: str
    citations: tuple[str, ...]
    unknown_indices: tuple[int, ...] = ()


@dataclass(frozen=True)
class AttributedAnswer:
    topic_id: str
    sentences: tuple[AnswerSentence, ...]
    word_count: int
    source: str


@dataclass(frozen=True)
class CitationReport:
    sentence_count: int
    coverage: float
    avg_citations_per_sentence: float
    violations: tuple[tuple[int, str], ...]


def retrieve_context(
    topic: AttributionTopic,
    index: InvertedIndex,
    reranker: Reranker,
    corpus: Corpus,
    stage1_depth: int = STAGE1_DEPTH,
) -> list[RankedCandidate]:
    """Two-stage retrieval: BM25 on the question, reranked by the narrative.

    The topic label is never used here; an empty narrative falls back to
    the question as the reranking query.
    """
    pool = bm25_search(index, topic.question, stage1_depth)
    if not pool:
        return []
    rerank_query = topic.narrative or topic.question
    candidates = [(c.doc_id, corpus.get(c.doc_id).text()) for c in pool]
    reranked = reranker.rerank(rerank_query, candidates)
    return reranked[:CONTEXT_SIZE]


def assemble_prompt(
    topic: AttributionTopic,
    context_docs: list[RankedCandidate],
    corpus: Corpus,
    templates: PromptTemplates | None = None,
) -> PromptBundle:
    """One-shot prompt: constraints, exemplar, evidence and topic context."""
    templates = templates or PromptTemplates.default()
    evidence_map: dict[int, str] = {}
    lines = ["### Your Provided Evidence"]
    for local, candidate in enumerate(context_docs[:CONTEXT_SIZE], 1):
        doc = corpus.get(candidate.doc_id)
        evidence_map[local] = doc.doc_id
        lines.append(f"[{local}] (score={candidate.score:.4f}) {doc.title} — {' '.join(doc.sentences)}")
    evidence_block = "\n".join(lines)

    context_lines = ["### Your Task", "Your Context:"]
    if topic.topic_label:
        context_lines.append(f"Topic: {topic.topic_label}")
    context_lines.append(f"Question: {topic.question}")
    if topic.narrative:
        context_lines.append(f"Narrative: {topic.narrative}")
    context_block = "\n".join(context_lines)

    assembled = "\n\n".join(
        [templates.constraints, templates.exemplar, evidence_block, context_block]
    )
    return PromptBundle(
        constraints_block=templates.constraints,
        exemplar_block=templates.exemplar,
        evidence_block=evidence_block,
        context_block=context_block,
        assembled_text=assembled,
        evidence_map=evidence_map,
    )


def parse_citations(topic_id: str, text: str, evidence_map: dict[int, str]) -> AttributedAnswer:
    """Parse a generated answer into sentences with citation doc_ids.

    Unknown citation indices are recorded on the sentence, not raised: the
    validator reports them as violations.
    """
    sentences = []
    total_words = 0
    for raw in segment_sentences(text):
        citations: list[str] = []
        unknown: list[int] = []
        for group in _CITATION_RE.findall(raw):
            for token in group.split(","):
                local = int(token.strip())
                if local in evidence_map:
                    citations.append(evidence_map[local])
                else:
                    unknown.append(local)
        stripped = _CITATION_RE.sub("", raw)
        stripped = " ".join(stripped.split())
        stripped = re.sub(r"\s+([.!?,;:])", r"\1", stripped)
        total_words += len(stripped.split())
        sentences.append(
            AnswerSentence(text=stripped, citations=tuple(citations), unknown_indices=tuple(unknown))
        )
    return AttributedAnswer(
        topic_id=topic_id, sentences=tuple(sentences), word_count=total_words, source=text
    )


def render_answer(answer: AttributedAnswer, index_of: dict[str, int]) -> str:
    """Render sentences back to bracket-cited text (inverse of parse_citations)."""
    parts = []
    for sentence in answer.sentences:
        marker = "[" + ",".join(str(index_of[d]) for d in sentence.citations) + "]" if sentence.citations else ""
        text = sentence.text
        if marker and text and text[-1] in ".!?":
            parts.append(f"{text[:-1].rstrip()} {marker}{text[-1]}")
        elif marker:
            parts.append(f"{text} {marker}")
        else:
            parts.append(text)
    return " ".join(parts)


def validate_answer(answer: AttributedAnswer, max_words: int = MAX_WORDS) -> CitationReport:
    """Coverage/density arithmetic plus an exhaustive violation listing."""
    violations: list[tuple[int, str]] = []
    n = len(answer.sentences)
    if n == 0:
        violations.append((0, EMPTY_ANSWER))
        return CitationReport(0, 1.0, 0.0, tuple(violations))
    cited = 0
    total_citations = 0
    for idx, sentence in enumerate(answer.sentences):
        count = len(sentence.citations) + len(sentence.unknown_indices)
        total_citations += count
        if count >= 1:
            cited += 1
        else:
            violations.append((idx, UNCITED))
        if count > MAX_CITATIONS:
            violations.append((idx, TOO_MANY))
        if sentence.unknown_indices:
            violations.append((idx, UNKNOWN_INDEX))
    if answer.word_count >= max_words:
        violations.append((0, WORD_LIMIT))
    return CitationReport(
        sentence_count=n,
        coverage=cited / n,
        avg_citations_per_sentence=total_citations / n,
        violations=tuple(violations),
    )


class ReplayClient:
    """Deterministic generation stub replaying stored responses by topic_id."""

    def __init__(self, path: str):
        self._responses: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                self._responses[str(record["topic_id"])] = str(record["text"])

    def generate(self, topic_id: str, prompt: str, max_words: int = MAX_WORDS) -> str:
        if topic_id not in self._responses:
            raise ReplayError(f"no replay entry for topic {topic_id!r}")
        return self._responses[topic_id]


class RemoteGenerationClient:
    """POST /v1/generate {prompt, max_words} -> {text}."""

    def __init__(self, endpoint: str, timeout: float = 60.0, retries: int = 2):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.retries = retries

    def generate(self, topic_id: str, prompt: str, max_words: int = MAX_WORDS) -> str:
        url = self.endpoint + "/v1/generate"
        attempts = self.retries + 1
        last = ""
        for _ in range(attempts):
            try:
                response = requests.post(
                    url, json={"prompt": prompt, "max_words": max_words}, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last = str(exc)
                continue
            if response.status_code == 200:
                return str(response.json()["text"])
            last = f"status {response.status_code}"
        raise BackendError(url, attempts, last)


def write_answers(answers: list[tuple[AttributedAnswer, CitationReport]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for answer, report in answers:
            record = {
                "topic_id": answer.topic_id,
                "sentences": [
                    {"text": s.text, "citations": list(s.citations)} for s in answer.sentences
                ],
                "word_count": answer.word_count,
                "report": {
                    "sentence_count": report.sentence_count,
                    "coverage": report.coverage,
                    "avg_citations_per_sentence": report.avg_citations_per_sentence,
                    "violations": [[i, kind] for i, kind in report.violations],
                },
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_answers(path: str) -> list[AttributedAnswer]:
    answers = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            sentences = tuple(
                AnswerSentence(text=s["text"], citations=tuple(s["citations"]))
                for s in record["sentences"]
            )
            answers.append(
                AttributedAnswer(
                    topic_id=str(record["topic_id"]),
                    sentences=sentences,
                    word_count=int(record["word_count"]),
                    source="",
                )
            )
    return answers
