"""Learned-scorer abstractions: reranker, NLI and embedder.

Each scorer has a deterministic mock implementation for offline runs and a
wire-protocol client for an external inference service.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
import requests

from .lexindex import RankedCandidate, tokenize
from .negation import NegationPatternSet, builtin_patterns, find_cues

ENTAILMENT = "entailment"
CONTRADICTION = "contradiction"
NEUTRAL = "neutral"

MOCK_EMBED_DIM = 256


class BackendError(Exception):
    """A remote scorer backend failed after all retry attempts."""

    def __init__(self, endpoint: str, attempts: int, detail: str):
        super().__init__(f"backend {endpoint} failed after {attempts} attempt(s): {detail}")
        self.endpoint = endpoint
        self.attempts = attempts


class ConfigurationError(Exception):
    pass


@dataclass(frozen=True)
class NliVerdict:
    p_entail: float
    p_contradict: float
    p_neutral: float

    def __post_init__(self):
        total = self.p_entail + self.p_contradict + self.p_neutral
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"NLI probabilities must sum to 1, got {total}")
        for p in (self.p_entail, self.p_contradict, self.p_neutral):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability out of range: {p}")

    @property
    def label(self) -> str:
        best = max(self.p_entail, self.p_contradict, self.p_neutral)
        winners = [
            name
            for name, p in (
                (ENTAILMENT, self.p_entail),
                (CONTRADICTION, self.p_contradict),
                (NEUTRAL, self.p_neutral),
            )
            if p == best
        ]
        return winners[0] if len(winners) == 1 else NEUTRAL


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    @property
    def dimension(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ScorerBackendConfig:
    kind: str = "mock"  # mock | remote
    endpoint: str = ""
    timeout: float = 30.0
    max_in_flight: int = 4
    batch_size: int = 32
    retries: int = 2

    def __post_init__(self):
        if self.kind == "remote" and not self.endpoint:
            raise ConfigurationError("remote backend requires a non-empty endpoint")


class Reranker(Protocol):
    def rerank(self, query: str, candidates: Sequence[tuple[str, str]]) -> list[RankedCandidate]: ...


class NliBackend(Protocol):
    def nli(self, premise: str, hypothesis: str) -> NliVerdict: ...


class Embedder(Protocol):
    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


def _rank_scored(scored: list[tuple[str, float]]) -> list[RankedCandidate]:
    ordered = sorted(scored, key=lambda item: (-item[1], item[0]))
    return [RankedCandidate(doc_id=d, score=s, rank=r) for r, (d, s) in enumerate(ordered, 1)]


class MockReranker:
    """Jaccard token-set similarity, deterministic and order-insensitive."""

    def rerank(self, query: str, candidates: Sequence[tuple[str, str]]) -> list[RankedCandidate]:
        if not candidates:
            raise ValueError("candidates must be non-empty")
        query_tokens = set(tokenize(query))
        scored = []
        for doc_id, text in candidates:
            doc_tokens = set(tokenize(text))
            union = query_tokens | doc_tokens
            score = len(query_tokens & doc_tokens) / len(union) if union else 0.0
            scored.append((doc_id, score))
        return _rank_scored(scored)


class MockNli:
    """Lexical-overlap-plus-negation rule standing in for a trained NLI model.

    With o = |tokens(premise) ∩ tokens(hypothesis)| / |tokens(hypothesis)|:
    a negation cue in the premise combined with o >= 0.5 reads as
    contradiction; o >= 0.7 without a cue reads as entailment; everything
    else is neutral.
    """

    def __init__(self, patterns: NegationPatternSet | None = None):
        self.patterns = patterns or builtin_patterns()

    def nli(self, premise: str, hypothesis: str) -> NliVerdict:
        if not premise or not hypothesis:
            raise ValueError("premise and hypothesis must be non-empty")
        premise_tokens = set(tokenize(premise))
        hypothesis_tokens = set(tokenize(hypothesis))
        overlap = (
            len(premise_tokens & hypothesis_tokens) / len(hypothesis_tokens)
            if hypothesis_tokens
            else 0.0
        )
        has_cue = bool(find_cues(premise, self.patterns))
        if has_cue and overlap >= 0.5:
            return NliVerdict(p_entail=0.05, p_contradict=0.90, p_neutral=0.05)
        if overlap >= 0.7:
            return NliVerdict(p_entail=0.90, p_contradict=0.05, p_neutral=0.05)
        return NliVerdict(p_entail=0.10, p_contradict=0.10, p_neutral=0.80)


def nli_two_way_mean(backend: NliBackend, text_a: str, text_b: str) -> tuple[float, float]:
    """Component-wise mean of (contradiction, entailment) over both directions."""
    forward = backend.nli(text_a, text_b)
    backward = backend.nli(text_b, text_a)
    return (
        (forward.p_contradict + backward.p_contradict) / 2.0,
        (forward.p_entail + backward.p_entail) / 2.0,
    )


class MockEmbedder:
    """Feature-hashed token counts in 256 dimensions, L2-normalized."""

    dimension = MOCK_EMBED_DIM

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        vectors = []
        for text in texts:
            counts = np.zeros(MOCK_EMBED_DIM, dtype=np.float64)
            for token in tokenize(text):
                counts[zlib.crc32(token.encode("utf-8")) % MOCK_EMBED_DIM] += 1.0
            norm = np.linalg.norm(counts)
            if norm > 0.0:
                counts /= norm
            vectors.append(EmbeddingVector(values=tuple(counts.tolist())))
        return vectors


class DenseIndex:
    """Exact brute-force cosine top-k over a corpus embedded once at build time."""

    def __init__(self, doc_ids: list[str], vectors: list[EmbeddingVector], embedder: Embedder):
        dims = {v.dimension for v in vectors}
        if len(dims) > 1:
            raise ConfigurationError(f"mixed embedding dimensions: {sorted(dims)}")
        self.doc_ids = list(doc_ids)
        self.embedder = embedder
        self._matrix = np.array([v.values for v in vectors], dtype=np.float64)
        norms = np.linalg.norm(self._matrix, axis=1)
        norms[norms == 0.0] = 1.0
        self._matrix = self._matrix / norms[:, None]

    @classmethod
    def build(cls, doc_ids: list[str], texts: list[str], embedder: Embedder) -> "DenseIndex":
        return cls(doc_ids, embedder.embed(texts), embedder)

    def search(self, query: str, k: int) -> list[RankedCandidate]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not query.strip():
            raise ValueError("empty query text")
        (qvec,) = self.embedder.embed([query])
        q = np.array(qvec.values, dtype=np.float64)
        if q.shape[0] != self._matrix.shape[1]:
            raise ConfigurationError(
                f"query dimension {q.shape[0]} != index dimension {self._matrix.shape[1]}"
            )
        norm = np.linalg.norm(q)
        if norm > 0.0:
            q = q / norm
        sims = self._matrix @ q
        scored = list(zip(self.doc_ids, (float(s) for s in sims)))
        ordered = sorted(scored, key=lambda item: (-item[1], item[0]))[:k]
        return [RankedCandidate(doc_id=d, score=s, rank=r) for r, (d, s) in enumerate(ordered, 1)]


def dense_search(index: DenseIndex, query: str, k: int) -> list[RankedCandidate]:
    return index.search(query, k)


class RemoteScorerClient:
    """HTTP client for the scorer wire protocol (rerank / nli / embed)."""

    def __init__(self, config: ScorerBackendConfig, session: requests.Session | None = None):
        if config.kind != "remote":
            raise ConfigurationError("RemoteScorerClient requires a remote backend config")
        self.config = config
        self._session = session or requests.Session()

    def _post(self, path: str, body: dict) -> dict:
        url = self.config.endpoint.rstrip("/") + path
        attempts = self.config.retries + 1
        last_detail = ""
        for _ in range(attempts):
            try:
                response = self._session.post(url, json=body, timeout=self.config.timeout)
            except requests.RequestException as exc:
                last_detail = str(exc)
                continue
            if response.status_code == 200:
                return response.json()
            if 400 <= response.status_code < 500:
                try:
                    detail = response.json().get("error", response.text)
                except ValueError:
                    detail = response.text
                raise BackendError(url, 1, f"rejected request ({response.status_code}): {detail}")
            last_detail = f"status {response.status_code}"
        raise BackendError(url, attempts, last_detail)

    def _batches(self, items: list) -> list[list]:
        size = self.config.batch_size
        return [items[i : i + size] for i in range(0, len(items), size)]

    def rerank(self, query: str, candidates: Sequence[tuple[str, str]]) -> list[RankedCandidate]:
        if not candidates:
            raise ValueError("candidates must be non-empty")
        scores: dict[str, float] = {}
        for batch in self._batches(list(candidates)):
            body = {"query": query, "passages": [{"id": d, "text": t} for d, t in batch]}
            payload = self._post("/v1/rerank", body)
            for entry in payload["scores"]:
                scores[str(entry["id"])] = float(entry["score"])
        missing = [d for d, _ in candidates if d not in scores]
        if missing:
            raise BackendError(self.config.endpoint, 1, f"missing scores for {missing}")
        return _rank_scored([(d, scores[d]) for d, _ in candidates])

    def nli(self, premise: str, hypothesis: str) -> NliVerdict:
        payload = self._post("/v1/nli", {"pairs": [{"premise": premise, "hypothesis": hypothesis}]})
        verdict = payload["verdicts"][0]
        return NliVerdict(
            p_entail=float(verdict["entail"]),
            p_contradict=float(verdict["contradict"]),
            p_neutral=float(verdict["neutral"]),
        )

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        vectors: list[EmbeddingVector] = []
        for batch in self._batches(list(texts)):
            payload = self._post("/v1/embed", {"texts": list(batch)})
            dimension = int(payload["dimension"])
            for values in payload["vectors"]:
                if len(values) != dimension:
                    raise ConfigurationError("embedding vector length disagrees with dimension")
                vectors.append(EmbeddingVector(values=tuple(float(v) for v in values)))
        return vectors
