"""Grounding engine: decoupled support/contradiction pipelines, variants v1-v5."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .corpus import Corpus, Document, GroundingTopic
from .fusion import (
    AdversarialConfig,
    RrfConfig,
    adversarial_score,
    expand_adversarial_queries,
    rrf_fuse,
    select_contradictions_adversarial,
)
from .lexindex import InvertedIndex, RankedCandidate, bm25_search
from .negation import NegationPatternSet, find_cues
from .scorers import CONTRADICTION, DenseIndex, NliBackend, Reranker

VARIANTS = ("v1", "v2", "v3", "v4", "v5")

SENTENCE = "sentence"
DOCUMENT = "document"

# Per-variant retrieval depths (support, contradiction).
_DEPTHS = {
    "v1": (500, 500),
    "v2": (500, 500),
    "v3": (100, 1000),
    "v4": (200, 200),
    "v5": (100, 1000),
}


class VariantError(Exception):
    pass


@dataclass(frozen=True)
class VariantConfig:
    variant: str = "v5"
    support_depth: int = 0
    contra_depth: int = 0
    granularity: str = SENTENCE
    rrf: RrfConfig = field(default_factory=RrfConfig)
    adversarial: AdversarialConfig = field(default_factory=AdversarialConfig)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise VariantError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.granularity not in (SENTENCE, DOCUMENT):
            raise VariantError(f"unknown granularity {self.granularity!r}")
        support, contra = _DEPTHS[self.variant]
        if self.support_depth <= 0:
            object.__setattr__(self, "support_depth", support)
        if self.contra_depth <= 0:
            object.__setattr__(self, "contra_depth", contra)


@dataclass(frozen=True)
class SelectedDoc:
    """A ranked document with provenance from its retrieval stage."""

    doc_id: str
    rank: int
    score: float
    sentence_index: int | None = None


@dataclass(frozen=True)
class GroundingResult:
    topic_id: str
    variant: str
    supporting: tuple[SelectedDoc, ...]
    contradicting: tuple[SelectedDoc, ...]
    support_ranking: tuple[SelectedDoc, ...]
    contra_ranking: tuple[SelectedDoc, ...]


class GroundingEngine:
    """Runs the support and contradiction branches for one variant."""

    def __init__(
        self,
        corpus: Corpus,
        index: InvertedIndex,
        reranker: Reranker,
        nli_backend: NliBackend,
        patterns: NegationPatternSet,
        config: VariantConfig,
        dense_index: DenseIndex | None = None,
    ):
        if config.variant in ("v2", "v3", "v4") and dense_index is None:
            raise VariantError(f"variant {config.variant} requires an embedder backend")
        self.corpus = corpus
        self.index = index
        self.reranker = reranker
        self.nli_backend = nli_backend
        self.patterns = patterns
        self.config = config
        self.dense_index = dense_index

    # -- support branch -------------------------------------------------

    def run_support_pipeline(self, topic: GroundingTopic) -> list[SelectedDoc]:
        """Full support branch ranking after strict-novelty filtering."""
        query = topic.question + " " + topic.answer_sentence
        variant = self.config.variant
        depth = self.config.support_depth
        if variant == "v1":
            pool = bm25_search(self.index, query, depth)
        elif variant == "v2":
            pool = self._fused(query, depth)
        elif variant in ("v3", "v4"):
            pool = self.dense_index.search(query, depth)
        else:  # v5
            pool = bm25_search(self.index, query, depth)
        pool = [c for c in pool if c.doc_id not in topic.old_ids]
        if variant in ("v3", "v4", "v5"):
            pool = self._rerank(topic.answer_sentence, pool)
        return [SelectedDoc(c.doc_id, c.rank, c.score) for c in pool]

    def _fused(self, query: str, depth: int) -> list[RankedCandidate]:
        lists = [
            lst
            for lst in (bm25_search(self.index, query, depth), self.dense_index.search(query, depth))
            if lst
        ]
        if not lists:
            return []
        return rrf_fuse(lists, self.config.rrf)

    def _rerank(self, query: str, pool: Sequence[RankedCandidate]) -> list[RankedCandidate]:
        if not pool:
            return []
        candidates = [(c.doc_id, self.corpus.get(c.doc_id).text()) for c in pool]
        return self.reranker.rerank(query, candidates)

    # -- contradiction branch -------------------------------------------

    def run_contradiction_pipeline(self, topic: GroundingTopic) -> list[SelectedDoc]:
        """Full contradiction branch ranking (docs classified as contradictions)."""
        if self.config.variant == "v4":
            return self._contradictions_adversarial(topic)
        query = topic.question + " " + topic.answer_sentence
        depth = self.config.contra_depth
        variant = self.config.variant
        if variant in ("v1", "v5"):
            pool = bm25_search(self.index, query, depth)
        elif variant == "v2":
            pool = self._fused(query, depth)
        else:  # v3
            pool = self.dense_index.search(query, depth)
        use_filter = variant in ("v3", "v5")
        found: list[SelectedDoc] = []
        for candidate in pool:
            doc = self.corpus.get(candidate.doc_id)
            hit = self._classify_document(doc, topic.answer_sentence, use_filter)
            if hit is not None:
                found.append(
                    SelectedDoc(candidate.doc_id, candidate.rank, candidate.score, sentence_index=hit)
                )
        return found

    def _classify_document(self, doc: Document, hypothesis: str, use_filter: bool) -> int | None:
        """Return the matched sentence index (-1 for document granularity) or None."""
        if self.config.granularity == DOCUMENT:
            if use_filter and not any(find_cues(s, self.patterns) for s in doc.sentences):
                return None
            verdict = self.nli_backend.nli(doc.text(), hypothesis)
            return -1 if verdict.label == CONTRADICTION else None
        for index, sentence in enumerate(doc.sentences):
            if use_filter and not find_cues(sentence, self.patterns):
                continue
            verdict = self.nli_backend.nli(sentence, hypothesis)
            if verdict.label == CONTRADICTION:
                return index
        return None

    def _contradictions_adversarial(self, topic: GroundingTopic) -> list[SelectedDoc]:
        config = self.config.adversarial
        queries = expand_adversarial_queries(topic.question, topic.answer_sentence, config)
        lists = [self.dense_index.search(q, config.per_query_depth) for q in queries]
        lists = [lst for lst in lists if lst]
        if not lists:
            return []
        pool = rrf_fuse(lists, RrfConfig(pool_cap=1200))
        scored = [
            adversarial_score(
                topic.answer_sentence,
                self.corpus.get(c.doc_id),
                self.nli_backend,
                self.patterns,
                config,
            )
            for c in pool
        ]
        # Ranking mirrors the selection rule: thresholded docs by score first,
        # then the remainder by score.
        by_score = sorted(scored, key=lambda s: (-s.s_value, s.doc_id))
        above = [s for s in by_score if s.mean_p_con >= config.con_threshold]
        below = [s for s in by_score if s.mean_p_con < config.con_threshold]
        ordered = above + below
        selection = select_contradictions_adversarial(scored, config)
        assert [s.doc_id for s in ordered[:3]] == selection
        return [
            SelectedDoc(s.doc_id, rank, s.s_value) for rank, s in enumerate(ordered, 1)
        ]

    # -- combined -------------------------------------------------------

    def ground(self, topic: GroundingTopic) -> GroundingResult:
        contra_ranking = self.run_contradiction_pipeline(topic)
        support_ranking = self.run_support_pipeline(topic)
        contradicting = [
            SelectedDoc(d.doc_id, rank, d.score, d.sentence_index)
            for rank, d in enumerate(contra_ranking[:3], 1)
        ]
        contra_ids = {d.doc_id for d in contradicting}
        supporting = []
        for doc in support_ranking:
            if doc.doc_id in contra_ids:
                continue
            supporting.append(SelectedDoc(doc.doc_id, len(supporting) + 1, doc.score))
            if len(supporting) == 3:
                break
        return GroundingResult(
            topic_id=topic.topic_id,
            variant=self.config.variant,
            supporting=tuple(supporting),
            contradicting=tuple(contradicting),
            support_ranking=tuple(support_ranking),
            contra_ranking=tuple(contra_ranking),
        )


def write_run_file(results: Sequence[GroundingResult], path: str, full_ranking: bool = False) -> None:
    """Tab-separated run file: topic_id, role, rank, doc_id, score, variant."""
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            support = result.support_ranking if full_ranking else result.supporting
            contra = result.contra_ranking if full_ranking else result.contradicting
            for role, docs in (("support", support), ("contradict", contra)):
                for rank, doc in enumerate(docs, 1):
                    fh.write(
                        f"{result.topic_id}\t{role}\t{rank}\t{doc.doc_id}\t{doc.score:.6f}\t{result.variant}\n"
                    )
