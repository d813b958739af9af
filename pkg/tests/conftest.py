"""Shared fixture builders."""
from bioground.corpus import Corpus, Document, GroundingTopic


def build_granularity_fixture(n_topics: int = 10):
    """30-doc corpus where document-level classification over-fires.

    Each topic has a gold contradiction (cue sentence restating the claim)
    and a distractor that outranks it lexically: the distractor spreads the
    claim tokens over cue-free sentences and keeps its negation cue in an
    off-topic sentence, so only whole-document inference marks it as a
    contradiction.
    """
    docs = []
    topics = []
    gold = {}
    for i in range(n_topics):
        words = [f"alpha{i}", f"beta{i}", f"gamma{i}", f"delta{i}", f"epsilon{i}", f"zeta{i}"]
        claim = " ".join(words).capitalize() + "."
        question = "Does " + " ".join(words) + " hold?"
        docs.append(
            Document(
                doc_id=f"gold{i}",
                title=f"Gold {i}",
                sentences=(
                    "No evidence that " + " ".join(words) + ".",
                    "Methods were standard across many heterogeneous collaborating "
                    "international clinical research sites overall.",
                ),
            )
        )
        docs.append(
            Document(
                doc_id=f"dist{i}",
                title=f"Review {i}",
                sentences=(
                    f"{words[0].capitalize()} {words[1]} {words[2]} reviewed in depth.",
                    f"{words[3].capitalize()} {words[4]} {words[5]} reviewed again.",
                    "No signs of adverse events.",
                ),
            )
        )
        docs.append(
            Document(
                doc_id=f"fill{i}",
                title=f"Filler {i}",
                sentences=(f"Background material item {i} unrelated to the claims.",),
            )
        )
        topics.append(
            GroundingTopic(
                topic_id=f"g{i}", question=question, answer_sentence=claim, old_ids=frozenset()
            )
        )
        gold[f"g{i}"] = f"gold{i}"
    return Corpus(docs), topics, gold
