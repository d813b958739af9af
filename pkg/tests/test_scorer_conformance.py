"""The offline scorer mocks must satisfy the shared wire-protocol fixture.

The same fixture file is consumed by the inference sidecar's test suite, so
any drift between the two implementations shows up on both sides.
"""
import json
from pathlib import Path

import pytest

from bioground.scorers import MockEmbedder, MockNli, MockReranker

FIXTURE = Path(__file__).parent / "fixtures" / "scorer_conformance.json"


@pytest.fixture(scope="module")
def cases():
    return json.loads(FIXTURE.read_text("utf-8"))


def test_rerank_cases(cases):
    reranker = MockReranker()
    for case in cases["rerank"]:
        request = case["request"]
        ranked = reranker.rerank(
            request["query"], [(p["id"], p["text"]) for p in request["passages"]]
        )
        by_id = {c.doc_id: c.score for c in ranked}
        for expected in case["response"]["scores"]:
            assert by_id[expected["id"]] == pytest.approx(expected["score"], abs=1e-6)


def test_nli_cases(cases):
    backend = MockNli()
    for case in cases["nli"]:
        pairs = case["request"]["pairs"]
        for pair, expected in zip(pairs, case["response"]["verdicts"]):
            verdict = backend.nli(pair["premise"], pair["hypothesis"])
            assert verdict.p_entail == pytest.approx(expected["entail"], abs=1e-6)
            assert verdict.p_contradict == pytest.approx(expected["contradict"], abs=1e-6)
            assert verdict.p_neutral == pytest.approx(expected["neutral"], abs=1e-6)


def test_embed_cases(cases):
    embedder = MockEmbedder()
    for case in cases["embed"]:
        vectors = embedder.embed(case["request"]["texts"])
        expected = case["response"]
        assert all(v.dimension == expected["dimension"] for v in vectors)
        for vector, want in zip(vectors, expected["vectors"]):
            assert list(vector.values) == pytest.approx(want, abs=1e-6)
