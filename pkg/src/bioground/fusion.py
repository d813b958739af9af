"""Reciprocal Rank Fusion and adversarial multi-query contradiction scoring."""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from .corpus import Document
from .lexindex import RankedCandidate
from .negation import NegationPatternSet, cue_count
from .scorers import NliBackend, nli_two_way_mean

DEFAULT_K_RRF = 60.0
DEFAULT_POOL_CAP = 1200
TEMPLATE_COUNT = 25

_PLACEHOLDER_RE = re.compile(r"\{([^{}]*)\}")


class TemplateError(Exception):
    pass


@dataclass(frozen=True)
class RrfConfig:
    k_rrf: float = DEFAULT_K_RRF
    pool_cap: int = DEFAULT_POOL_CAP

    def __post_init__(self):
        if self.k_rrf <= 0:
            raise ValueError("k_rrf must be positive")
        if self.pool_cap < 1:
            raise ValueError("pool_cap must be >= 1")


@dataclass(frozen=True)
class AdversarialConfig:
    templates: tuple[str, ...] = ()
    per_query_depth: int = 200
    lambda_entail: float = 0.5
    gamma_cue: float = 0.1
    cue_cap: int = 6
    con_threshold: float = 0.35

    def __post_init__(self):
        templates = self.templates or default_templates()
        object.__setattr__(self, "templates", tuple(templates))
        if len(self.templates) != TEMPLATE_COUNT:
            raise TemplateError(f"expected {TEMPLATE_COUNT} templates, got {len(self.templates)}")
        if not 0.0 <= self.con_threshold <= 1.0:
            raise ValueError("con_threshold must be in [0, 1]")
        if self.cue_cap < 1:
            raise ValueError("cue_cap must be >= 1")


@dataclass(frozen=True)
class AdversarialScore:
    doc_id: str
    mean_p_con: float
    mean_p_ent: float
    cue_count: int
    s_value: float


def default_templates() -> tuple[str, ...]:
    text = resources.files("bioground.data").joinpath("adversarial_templates.txt").read_text("utf-8")
    return tuple(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


def load_templates(path: str) -> tuple[str, ...]:
    with open(path, encoding="utf-8") as fh:
        return tuple(line.strip() for line in fh if line.strip() and not line.startswith("#"))


def rrf_fuse(rank_lists: Sequence[Sequence[RankedCandidate]], config: RrfConfig = RrfConfig()) -> list[RankedCandidate]:
    """Fuse ranked lists: score(d) = sum over lists of 1/(k_rrf + rank(d))."""
    if not rank_lists or all(not lst for lst in rank_lists):
        raise ValueError("at least one non-empty rank list is required")
    fused: dict[str, float] = {}
    for ranked in rank_lists:
        for candidate in ranked:
            fused[candidate.doc_id] = fused.get(candidate.doc_id, 0.0) + 1.0 / (
                config.k_rrf + candidate.rank
            )
    ordered = sorted(fused.items(), key=lambda item: (-item[1], item[0]))[: config.pool_cap]
    return [RankedCandidate(doc_id=d, score=s, rank=r) for r, (d, s) in enumerate(ordered, 1)]


def expand_adversarial_queries(question: str, answer: str, config: AdversarialConfig) -> list[str]:
    """Instantiate every template with {Q} -> question and {A} -> answer."""
    queries = []
    for template in config.templates:
        for name in _PLACEHOLDER_RE.findall(template):
            if name not in ("Q", "A"):
                raise TemplateError(f"template {template!r} references unknown placeholder {{{name}}}")
        queries.append(template.replace("{Q}", question).replace("{A}", answer))
    return queries


def adversarial_score(
    claim: str,
    document: Document,
    nli_backend: NliBackend,
    patterns: NegationPatternSet,
    config: AdversarialConfig,
) -> AdversarialScore:
    """Two-way NLI penalty score with a capped negation-cue bonus."""
    text = document.text()
    mean_p_con, mean_p_ent = nli_two_way_mean(nli_backend, text, claim)
    cues = cue_count(text, patterns)
    return AdversarialScore(
        doc_id=document.doc_id,
        mean_p_con=mean_p_con,
        mean_p_ent=mean_p_ent,
        cue_count=cues,
        s_value=score_value(mean_p_con, mean_p_ent, cues, config),
    )


def score_value(mean_p_con: float, mean_p_ent: float, cues: int, config: AdversarialConfig) -> float:
    return (
        mean_p_con
        - config.lambda_entail * mean_p_ent
        + config.gamma_cue * min(cues, config.cue_cap) / config.cue_cap
    )


def select_contradictions_adversarial(
    scored: Sequence[AdversarialScore], config: AdversarialConfig
) -> list[str]:
    """Up to 3 doc_ids: thresholded by mean contradiction probability, ranked
    by score; short lists are backfilled from the remaining pool by score."""
    by_score = sorted(scored, key=lambda s: (-s.s_value, s.doc_id))
    selected = [s.doc_id for s in by_score if s.mean_p_con >= config.con_threshold][:3]
    if len(selected) < 3:
        for entry in by_score:
            if entry.doc_id not in selected:
                selected.append(entry.doc_id)
            if len(selected) == 3:
                break
    return selected[:3]
