"""Tokenization, inverted index construction and BM25 top-k search."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .corpus import Corpus, Document

DEFAULT_K1 = 0.9
DEFAULT_B = 0.4

SNAPSHOT_MAGIC = "bioground-lexindex"
SNAPSHOT_VERSION = 1

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class IndexError_(Exception):
    """Raised for index build or snapshot problems."""


@dataclass(frozen=True)
class RankedCandidate:
    """One document in a ranked result list (rank is 1-based)."""

    doc_id: str
    score: float
    rank: int


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


class InvertedIndex:
    """Immutable BM25 index over a corpus (documents indexed as title + sentences)."""

    def __init__(
        self,
        doc_ids: list[str],
        postings: dict[str, list[tuple[int, int]]],
        doc_lengths: list[int],
        k1: float = DEFAULT_K1,
        b: float = DEFAULT_B,
    ):
        self.doc_ids = list(doc_ids)
        self.postings = postings
        self.doc_lengths = list(doc_lengths)
        self.doc_count = len(doc_lengths)
        self.avg_doc_length = sum(doc_lengths) / len(doc_lengths) if doc_lengths else 0.0
        self.k1 = k1
        self.b = b

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))


def document_text(doc: Document) -> str:
    return doc.text()


def build_index(corpus: Corpus, k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> InvertedIndex:
    """Build an inverted index over all corpus documents."""
    if len(corpus) == 0:
        raise IndexError_("cannot build an index over an empty corpus")
    doc_ids = []
    doc_lengths = []
    postings: dict[str, list[tuple[int, int]]] = {}
    for ordinal, doc in enumerate(corpus):
        tokens = tokenize(document_text(doc))
        doc_ids.append(doc.doc_id)
        doc_lengths.append(len(tokens))
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((ordinal, tf))
    return InvertedIndex(doc_ids, postings, doc_lengths, k1=k1, b=b)


def bm25_search(index: InvertedIndex, query: str, k: int) -> list[RankedCandidate]:
    """Top-k documents by BM25 score; ties broken by ascending doc_id.

    Only documents with a positive score are returned, so the result may be
    shorter than k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    terms = tokenize(query)
    if not terms:
        return []
    scores: dict[int, float] = {}
    for term in set(terms):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for ordinal, tf in plist:
            norm = index.k1 * (1.0 - index.b + index.b * index.doc_lengths[ordinal] / index.avg_doc_length)
            scores[ordinal] = scores.get(ordinal, 0.0) + idf * tf * (index.k1 + 1.0) / (tf + norm)
    scored = [(s, index.doc_ids[o]) for o, s in scores.items() if s > 0.0]
    scored.sort(key=lambda item: (-item[0], item[1]))
    return [
        RankedCandidate(doc_id=doc_id, score=score, rank=rank)
        for rank, (score, doc_id) in enumerate(scored[:k], 1)
    ]


def save_snapshot(index: InvertedIndex, path: str) -> None:
    """Write a lossless JSON snapshot with a magic header."""
    payload = {
        "magic": SNAPSHOT_MAGIC,
        "version": SNAPSHOT_VERSION,
        "k1": index.k1,
        "b": index.b,
        "doc_ids": index.doc_ids,
        "doc_lengths": index.doc_lengths,
        "postings": {term: [[o, tf] for o, tf in plist] for term, plist in index.postings.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_snapshot(path: str) -> InvertedIndex:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("magic") != SNAPSHOT_MAGIC:
        raise IndexError_(f"{path}: not a lexindex snapshot")
    if payload.get("version") != SNAPSHOT_VERSION:
        raise IndexError_(f"{path}: unsupported snapshot version {payload.get('version')!r}")
    postings = {term: [(int(o), int(tf)) for o, tf in plist] for term, plist in payload["postings"].items()}
    return InvertedIndex(
        doc_ids=payload["doc_ids"],
        postings=postings,
        doc_lengths=payload["doc_lengths"],
        k1=payload["k1"],
        b=payload["b"],
    )
