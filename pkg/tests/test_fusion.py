import itertools

import pytest

from bioground.corpus import Document
from bioground.fusion import (
    AdversarialConfig,
    AdversarialScore,
    RrfConfig,
    TemplateError,
    adversarial_score,
    default_templates,
    expand_adversarial_queries,
    rrf_fuse,
    score_value,
    select_contradictions_adversarial,
)
from bioground.lexindex import RankedCandidate
from bioground.scorers import MockNli


def ranked(doc_ids):
    return [RankedCandidate(doc_id=d, score=1.0 / r, rank=r) for r, d in enumerate(doc_ids, 1)]


class TestRrfFuse:
    def test_single_list_identity_of_order(self):
        fused = rrf_fuse([ranked(["a", "b", "c"])])
        assert [c.doc_id for c in fused] == ["a", "b", "c"]
        for candidate in fused:
            assert candidate.score == pytest.approx(1.0 / (60 + candidate.rank))

    def test_presence_in_both_lists_wins(self):
        fused = rrf_fuse([ranked(["d", "e"]), ranked(["d"])])
        assert fused[0].doc_id == "d"
        assert fused[0].score == pytest.approx(2 / 61)

    def test_three_list_hand_table(self):
        # Spreadsheet-style sums of 1/(60+r) per doc over the three lists.
        lists = [
            ranked(["a", "b", "c", "d", "e"]),
            ranked(["b", "a", "e", "c", "f"]),
            ranked(["c", "f", "a", "b", "g"]),
        ]
        expected = {
            "a": 1 / 61 + 1 / 62 + 1 / 63,
            "b": 1 / 62 + 1 / 61 + 1 / 64,
            "c": 1 / 63 + 1 / 64 + 1 / 61,
            "d": 1 / 64,
            "e": 1 / 65 + 1 / 63,
            "f": 1 / 65 + 1 / 62,
            "g": 1 / 65,
        }
        fused = rrf_fuse(lists)
        assert [c.doc_id for c in fused] == sorted(expected, key=lambda d: (-expected[d], d))
        for candidate in fused:
            assert candidate.score == pytest.approx(expected[candidate.doc_id], abs=1e-9)

    def test_permutation_invariant(self):
        lists = [ranked(["a", "b"]), ranked(["c", "a"]), ranked(["b", "d"])]
        baseline = rrf_fuse(lists)
        for permutation in itertools.permutations(lists):
            assert rrf_fuse(list(permutation)) == baseline

    def test_pool_cap_and_dedup(self):
        lists = [ranked([f"d{i}" for i in range(20)]), ranked([f"d{i}" for i in range(10, 30)])]
        fused = rrf_fuse(lists, RrfConfig(pool_cap=8))
        ids = [c.doc_id for c in fused]
        assert len(ids) == 8
        assert len(set(ids)) == 8

    def test_requires_non_empty_input(self):
        with pytest.raises(ValueError):
            rrf_fuse([[]])


class TestExpandQueries:
    def test_placeholder_substitution(self):
        config = AdversarialConfig()
        queries = expand_adversarial_queries("X", "Y", config)
        assert "X refutes Y" in queries
        assert "no effect of Y" in queries
        assert "fails to show" in queries

    def test_exactly_25_queries(self):
        queries = expand_adversarial_queries("q", "a", AdversarialConfig())
        assert len(queries) == 25

    def test_order_follows_templates(self):
        config = AdversarialConfig()
        queries = expand_adversarial_queries("q1", "a1", config)
        assert queries[0] == config.templates[0].replace("{Q}", "q1").replace("{A}", "a1")

    def test_unknown_placeholder_rejected(self):
        templates = list(default_templates())
        templates[3] = "bad {X} template"
        config = AdversarialConfig(templates=tuple(templates))
        with pytest.raises(TemplateError, match="X"):
            expand_adversarial_queries("q", "a", config)

    def test_wrong_template_count_rejected(self):
        with pytest.raises(TemplateError):
            AdversarialConfig(templates=("only one {A}",))


class TestAdversarialScore:
    config = AdversarialConfig()

    def test_worked_example_rounded_inputs(self):
        s = score_value(0.50, 0.50, 1, self.config)
        assert s == pytest.approx(0.50 - 0.25 + 0.1 * (1 / 6), abs=1e-12)
        assert s == pytest.approx(0.2667, abs=0.0005)

    def test_zero_case(self):
        assert score_value(0.0, 0.0, 0, self.config) == 0.0

    def test_cue_cap_saturates(self):
        capped = score_value(0.0, 0.0, 100, self.config)
        assert capped == pytest.approx(0.1)
        assert capped == score_value(0.0, 0.0, 6, self.config)

    def test_monotone_in_components(self):
        base = score_value(0.4, 0.4, 2, self.config)
        assert score_value(0.5, 0.4, 2, self.config) > base
        assert score_value(0.4, 0.5, 2, self.config) < base
        assert score_value(0.4, 0.4, 3, self.config) > base
        assert score_value(0.4, 0.4, 7, self.config) == score_value(0.4, 0.4, 6, self.config)

    def test_from_document_recomputable(self):
        doc = Document(
            doc_id="d1",
            title="ALDH1 outcomes",
            sentences=("No evidence of improved outcomes with ALDH1 expression.",),
        )
        scored = adversarial_score(
            "ALDH1 expression improves outcomes",
            doc,
            MockNli(),
            MockNli().patterns,
            self.config,
        )
        recomputed = score_value(scored.mean_p_con, scored.mean_p_ent, scored.cue_count, self.config)
        assert scored.s_value == pytest.approx(recomputed, abs=1e-9)


class TestSelection:
    config = AdversarialConfig()

    def entry(self, doc_id, con, ent=0.0, cues=0):
        return AdversarialScore(
            doc_id=doc_id,
            mean_p_con=con,
            mean_p_ent=ent,
            cue_count=cues,
            s_value=score_value(con, ent, cues, self.config),
        )

    def test_threshold_then_backfill(self):
        # Hand-enumerated 5-doc fixture: d1, d4 above threshold; best of the
        # rest by score is d3.
        scored = [
            self.entry("d1", 0.40),
            self.entry("d2", 0.10),
            self.entry("d3", 0.30),
            self.entry("d4", 0.90),
            self.entry("d5", 0.20),
        ]
        assert select_contradictions_adversarial(scored, self.config) == ["d4", "d1", "d3"]

    def test_all_above_threshold_takes_top3(self):
        scored = [self.entry(f"d{i}", 0.4 + 0.1 * i) for i in range(5)]
        assert select_contradictions_adversarial(scored, self.config) == ["d4", "d3", "d2"]

    def test_empty_pool(self):
        assert select_contradictions_adversarial([], self.config) == []

    def test_size_is_min_3_pool(self):
        scored = [self.entry("d1", 0.9), self.entry("d2", 0.1)]
        assert len(select_contradictions_adversarial(scored, self.config)) == 2

    def test_ties_break_by_doc_id(self):
        scored = [self.entry("db", 0.5), self.entry("da", 0.5), self.entry("dc", 0.5)]
        assert select_contradictions_adversarial(scored, self.config) == ["da", "db", "dc"]
