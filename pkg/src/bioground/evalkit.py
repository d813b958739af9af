"""Evaluation kit: reciprocal rank, class-weighted MRR, selection PRF, citations."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import EvidenceLabel, Label

RANK_LIST = "rank-list"
TOP3 = "top3"


class EvaluationError(Exception):
    pass


@dataclass(frozen=True)
class MrrReport:
    mrr_support: float
    mrr_contra: float
    n_support: int
    n_contra: int
    weighted_mrr: float
    per_topic_support: dict[str, float]
    per_topic_contra: dict[str, float]
    mode: str


@dataclass(frozen=True)
class ClassPRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class SelectionPRF:
    support: ClassPRF
    contradiction: ClassPRF


def reciprocal_rank(ranked_doc_ids: Sequence[str], gold_doc_ids: Iterable[str]) -> float:
    """1/position of the first gold id; 0 if absent."""
    gold = set(gold_doc_ids)
    for position, doc_id in enumerate(ranked_doc_ids, 1):
        if doc_id in gold:
            return 1.0 / position
    return 0.0


def weighted_mrr(mrr_s: float, mrr_c: float, n_s: int, n_c: int) -> float:
    """Class-size-weighted combination of support and contradiction MRR."""
    total = n_s + n_c
    if total < 1:
        raise EvaluationError("weighted MRR needs at least one topic")
    return (n_s * mrr_s + n_c * mrr_c) / total


def _prf(tp: int, selected: int, relevant: int) -> ClassPRF:
    precision = tp / selected if selected else 0.0
    recall = tp / relevant if relevant else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ClassPRF(precision=precision, recall=recall, f1=f1)


def load_run_file(path: str) -> dict[str, dict[str, list[str]]]:
    """Parse a tab-separated run file into topic -> role -> ranked doc_ids."""
    run: dict[str, dict[str, list[tuple[int, str]]]] = defaultdict(lambda: defaultdict(list))
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 6:
                raise EvaluationError(f"{path}:{lineno}: expected 6 tab-separated fields")
            topic_id, role, rank, doc_id, _score, _variant = parts
            if role not in ("support", "contradict"):
                raise EvaluationError(f"{path}:{lineno}: unknown role {role!r}")
            run[topic_id][role].append((int(rank), doc_id))
    ordered: dict[str, dict[str, list[str]]] = {}
    for topic_id, roles in run.items():
        ordered[topic_id] = {
            role: [doc_id for _, doc_id in sorted(entries)] for role, entries in roles.items()
        }
    return ordered


def evaluate_run(
    run: dict[str, dict[str, list[str]]],
    gold_labels: Sequence[EvidenceLabel],
    mode: str = RANK_LIST,
) -> tuple[MrrReport, SelectionPRF]:
    """Per-class MRR over the designated ranking plus PRF over top-3 selections."""
    if mode not in (RANK_LIST, TOP3):
        raise EvaluationError(f"unknown mode {mode!r}")
    gold_support: dict[str, set[str]] = defaultdict(set)
    gold_contra: dict[str, set[str]] = defaultdict(set)
    for label in gold_labels:
        target = gold_support if label.label is Label.SUPPORT else gold_contra
        target[label.topic_id].add(label.doc_id)
    known_topics = set(gold_support) | set(gold_contra)
    for topic_id in run:
        if topic_id not in known_topics:
            raise EvaluationError(f"run references unknown topic {topic_id!r}")

    per_support: dict[str, float] = {}
    per_contra: dict[str, float] = {}
    counts = {"support": [0, 0, 0], "contradict": [0, 0, 0]}  # tp, selected, relevant
    for topic_id in sorted(known_topics):
        roles = run.get(topic_id, {})
        for role, gold_map, per_topic in (
            ("support", gold_support, per_support),
            ("contradict", gold_contra, per_contra),
        ):
            gold = gold_map.get(topic_id)
            ranking = roles.get(role, [])
            if mode == TOP3:
                ranking = ranking[:3]
            if gold:
                per_topic[topic_id] = reciprocal_rank(ranking, gold)
                selection = set(ranking[:3])
                counts[role][0] += len(selection & gold)
                counts[role][1] += len(selection)
                counts[role][2] += len(gold)

    n_support = len(per_support)
    n_contra = len(per_contra)
    mrr_support = sum(per_support.values()) / n_support if n_support else 0.0
    mrr_contra = sum(per_contra.values()) / n_contra if n_contra else 0.0
    report = MrrReport(
        mrr_support=mrr_support,
        mrr_contra=mrr_contra,
        n_support=n_support,
        n_contra=n_contra,
        weighted_mrr=weighted_mrr(mrr_support, mrr_contra, n_support, n_contra),
        per_topic_support=per_support,
        per_topic_contra=per_contra,
        mode=mode,
    )
    prf = SelectionPRF(
        support=_prf(*counts["support"]),
        contradiction=_prf(*counts["contradict"]),
    )
    return report, prf


def format_comparison_table(rows: list[tuple[str, MrrReport]]) -> str:
    """Plain-text table: run name, MRR Sup, MRR Con, Weighted MRR, Rank."""
    ranked = sorted(rows, key=lambda item: -item[1].weighted_mrr)
    rank_of = {name: rank for rank, (name, _) in enumerate(ranked, 1)}
    lines = [f"{'Run':<28} {'MRR Sup':>8} {'MRR Con':>8} {'Weighted MRR':>13} {'Rank':>5}"]
    for name, report in rows:
        lines.append(
            f"{name:<28} {report.mrr_support:>8.3f} {report.mrr_contra:>8.3f} "
            f"{report.weighted_mrr:>13.3f} {rank_of[name]:>5}"
        )
    return "\n".join(lines)
