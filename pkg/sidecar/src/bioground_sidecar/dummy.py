"""Deterministic dummy scorer backends.

These reimplement, independently of the client package, the published
offline stand-ins for the three learned scorers so that the wire protocol
can be conformance-tested without model downloads:

- rerank: Jaccard similarity over lowercase alphanumeric token sets
- nli: lexical overlap of the hypothesis tokens found in the premise, gated
  by a clinical negation cue in the premise
- embed: CRC32 feature hashing of token counts into 256 dims, L2-normalized
"""
import re
import zlib
from math import sqrt

EMBED_DIM = 256

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# cue set mirroring the client's builtin list; "no" is matched at word starts
# only (prefix mode), every other phrase at full word boundaries
_WORD_CUES = [
    "not", "without", "absence of", "no evidence of", "no signs of",
    "denies", "denied", "lack of", "lacking", "lacks", "negative for",
    "free of", "fails to", "failed to", "did not", "does not", "do not",
    "cannot", "ruled out", "rule out", "neither", "nor",
]
_CUE_RE = re.compile(
    r"\bno|" + "|".join(r"\b" + re.escape(c).replace(r"\ ", r"\s+") + r"\b" for c in _WORD_CUES),
    re.IGNORECASE,
)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def has_negation_cue(text: str) -> bool:
    return _CUE_RE.search(text) is not None


def rerank_score(query: str, passage: str) -> float:
    query_tokens = set(tokenize(query))
    passage_tokens = set(tokenize(passage))
    union = query_tokens | passage_tokens
    if not union:
        return 0.0
    return len(query_tokens & passage_tokens) / len(union)


def nli_verdict(premise: str, hypothesis: str) -> dict:
    """Entail/contradict/neutral probabilities; always sums to 1."""
    premise_tokens = set(tokenize(premise))
    hypothesis_tokens = set(tokenize(hypothesis))
    overlap = (
        len(premise_tokens & hypothesis_tokens) / len(hypothesis_tokens)
        if hypothesis_tokens
        else 0.0
    )
    if has_negation_cue(premise) and overlap >= 0.5:
        return {"entail": 0.05, "contradict": 0.90, "neutral": 0.05}
    if overlap >= 0.7:
        return {"entail": 0.90, "contradict": 0.05, "neutral": 0.05}
    return {"entail": 0.10, "contradict": 0.10, "neutral": 0.80}


def embed_text(text: str) -> list[float]:
    counts = [0.0] * EMBED_DIM
    for token in tokenize(text):
        counts[zlib.crc32(token.encode("utf-8")) % EMBED_DIM] += 1.0
    norm = sqrt(sum(c * c for c in counts))
    if norm > 0.0:
        counts = [c / norm for c in counts]
    return counts
