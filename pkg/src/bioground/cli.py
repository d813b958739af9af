"""Command-line entry point: index, ground, attribute, validate, eval."""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import attribution, corpus as corpus_mod, evalkit, fusion, grounding, lexindex, negation, scorers

ENV_ENDPOINT = "BIOGROUND_ENDPOINT"
ENV_TIMEOUT = "BIOGROUND_TIMEOUT"


class CliError(Exception):
    pass


def _endpoint(args) -> str:
    return os.environ.get(ENV_ENDPOINT) or getattr(args, "endpoint", "") or ""


def _timeout(args) -> float:
    raw = os.environ.get(ENV_TIMEOUT)
    return float(raw) if raw else getattr(args, "timeout", 30.0)


def _load_patterns(args) -> negation.NegationPatternSet:
    if getattr(args, "negation_patterns", None):
        return negation.load_patterns(args.negation_patterns)
    return negation.builtin_patterns()


def _backends(args):
    """Reranker, NLI and embedder for the selected backend kind."""
    if args.backend == "mock":
        patterns = _load_patterns(args)
        return scorers.MockReranker(), scorers.MockNli(patterns), scorers.MockEmbedder()
    endpoint = _endpoint(args)
    if not endpoint:
        raise CliError("remote backend requires --endpoint or " + ENV_ENDPOINT)
    config = scorers.ScorerBackendConfig(kind="remote", endpoint=endpoint, timeout=_timeout(args))
    client = scorers.RemoteScorerClient(config)
    return client, client, client


def cmd_index(args) -> int:
    if os.path.exists(args.out) and not args.force:
        raise CliError(f"refusing to overwrite existing snapshot {args.out}; pass --force")
    corpus = corpus_mod.load_corpus(args.corpus)
    index = lexindex.build_index(corpus, k1=args.k1, b=args.b)
    lexindex.save_snapshot(index, args.out)
    print(f"docs={index.doc_count}")
    print(f"snapshot written to {args.out}")
    return 0


def cmd_ground(args) -> int:
    corpus = corpus_mod.load_corpus(args.corpus)
    topics = corpus_mod.load_grounding_topics(args.topics)
    patterns = _load_patterns(args)
    reranker, nli_backend, embedder = _backends(args)
    index = lexindex.load_snapshot(args.index) if args.index else lexindex.build_index(corpus)
    templates = (
        fusion.load_templates(args.adversarial_templates) if args.adversarial_templates else ()
    )
    config = grounding.VariantConfig(
        variant=args.variant,
        support_depth=args.support_depth,
        contra_depth=args.contra_depth,
        granularity=args.granularity,
        rrf=fusion.RrfConfig(k_rrf=args.k_rrf, pool_cap=args.pool_cap),
        adversarial=fusion.AdversarialConfig(
            templates=templates,
            per_query_depth=args.per_query_depth,
            lambda_entail=args.entail_penalty,
            gamma_cue=args.cue_bonus,
            cue_cap=args.cue_cap,
            con_threshold=args.con_threshold,
        ),
    )
    dense_index = None
    if config.variant in ("v2", "v3", "v4"):
        doc_ids = corpus.doc_ids
        dense_index = scorers.DenseIndex.build(
            doc_ids, [corpus.get(d).text() for d in doc_ids], embedder
        )
    engine = grounding.GroundingEngine(
        corpus, index, reranker, nli_backend, patterns, config, dense_index
    )
    print(f"variant={config.variant} granularity={config.granularity} "
          f"support_depth={config.support_depth} contra_depth={config.contra_depth} "
          f"backend={args.backend} topics={len(topics)}")
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(engine.ground, topics))
    grounding.write_run_file(results, args.out, full_ranking=args.full_ranking)
    print(f"run file written to {args.out}")
    return 0


def cmd_attribute(args) -> int:
    corpus = corpus_mod.load_corpus(args.corpus)
    topics = corpus_mod.load_attribution_topics(args.topics)
    index = lexindex.build_index(corpus)
    reranker, _, _ = _backends(args)
    if args.templates_constraints and args.templates_exemplar:
        templates = attribution.PromptTemplates.from_files(
            args.templates_constraints, args.templates_exemplar
        )
    else:
        templates = attribution.PromptTemplates.default()
    if args.mode == "replay":
        if not args.replay_file:
            raise CliError("--mode replay requires --replay-file")
        client = attribution.ReplayClient(args.replay_file)
    else:
        endpoint = _endpoint(args)
        if not endpoint:
            raise CliError("remote mode requires --endpoint or " + ENV_ENDPOINT)
        client = attribution.RemoteGenerationClient(endpoint, timeout=_timeout(args))

    def run_topic(topic):
        context = attribution.retrieve_context(topic, index, reranker, corpus)
        bundle = attribution.assemble_prompt(topic, context, corpus, templates)
        text = client.generate(topic.topic_id, bundle.assembled_text)
        answer = attribution.parse_citations(topic.topic_id, text, bundle.evidence_map)
        return answer, attribution.validate_answer(answer)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        answers = list(pool.map(run_topic, topics))
    attribution.write_answers(answers, args.out)
    for answer, report in answers:
        print(
            f"{answer.topic_id}: sentences={report.sentence_count} "
            f"coverage={report.coverage:.3f} avg_citations={report.avg_citations_per_sentence:.3f} "
            f"violations={len(report.violations)}"
        )
    print(f"answers written to {args.out}")
    return 0


def _print_citation_summary(path: str) -> None:
    answers = attribution.load_answers(path)
    print(f"{'Topic':<16} {'Sents':>6} {'Coverage':>9} {'Avg cit/sent':>13} {'Violations':>11}")
    for answer in answers:
        report = attribution.validate_answer(answer)
        print(
            f"{answer.topic_id:<16} {report.sentence_count:>6} {report.coverage:>9.3f} "
            f"{report.avg_citations_per_sentence:>13.3f} {len(report.violations):>11}"
        )


def cmd_validate(args) -> int:
    _print_citation_summary(args.answers)
    return 0


def cmd_eval(args) -> int:
    if args.metric == "citations":
        _print_citation_summary(args.answers)
        return 0
    gold = corpus_mod.load_gold_labels(args.gold)
    rows = []
    for run_path in args.run:
        run = evalkit.load_run_file(run_path)
        report, prf = evalkit.evaluate_run(run, gold, mode=args.mode)
        rows.append((os.path.basename(run_path), report))
        print(
            f"{run_path}: mode={report.mode} "
            f"support P={prf.support.precision:.3f} R={prf.support.recall:.3f} F1={prf.support.f1:.3f} | "
            f"contradiction P={prf.contradiction.precision:.3f} R={prf.contradiction.recall:.3f} "
            f"F1={prf.contradiction.f1:.3f}"
        )
    print(evalkit.format_comparison_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bioground")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build and snapshot a BM25 index")
    p_index.add_argument("--corpus", required=True, help="corpus file (line-delimited records)")
    p_index.add_argument("--out", required=True, help="snapshot output path")
    p_index.add_argument("--k1", type=float, default=lexindex.DEFAULT_K1, help="BM25 k1 (default 0.9)")
    p_index.add_argument("--b", type=float, default=lexindex.DEFAULT_B, help="BM25 b (default 0.4)")
    p_index.add_argument("--force", action="store_true", help="overwrite an existing snapshot")
    p_index.set_defaults(func=cmd_index)

    p_ground = sub.add_parser("ground", help="run the grounding pipelines")
    p_ground.add_argument("--variant", choices=grounding.VARIANTS, default="v5")
    p_ground.add_argument("--topics", required=True)
    p_ground.add_argument("--corpus", required=True)
    p_ground.add_argument("--index", default="", help="optional index snapshot to load")
    p_ground.add_argument("--backend", choices=("mock", "remote"), default="mock")
    p_ground.add_argument("--endpoint", default="", help="remote scorer endpoint")
    p_ground.add_argument("--timeout", type=float, default=30.0)
    p_ground.add_argument("--out", required=True)
    p_ground.add_argument("--support-depth", type=int, default=0,
                          help="support retrieval depth (default per variant: 100/200/500)")
    p_ground.add_argument("--contra-depth", type=int, default=0,
                          help="contradiction retrieval depth (default per variant: 500/1000)")
    p_ground.add_argument("--granularity", choices=(grounding.SENTENCE, grounding.DOCUMENT),
                          default=grounding.SENTENCE)
    p_ground.add_argument("--negation-patterns", default="", help="override builtin cue patterns")
    p_ground.add_argument("--adversarial-templates", default="", help="override builtin templates")
    p_ground.add_argument("--k-rrf", type=float, default=fusion.DEFAULT_K_RRF, help="RRF k (default 60)")
    p_ground.add_argument("--pool-cap", type=int, default=fusion.DEFAULT_POOL_CAP,
                          help="fused pool cap (default 1200)")
    p_ground.add_argument("--per-query-depth", type=int, default=200,
                          help="adversarial per-query depth (default 200)")
    p_ground.add_argument("--entail-penalty", type=float, default=0.5,
                          help="entailment penalty weight (default 0.5)")
    p_ground.add_argument("--cue-bonus", type=float, default=0.1,
                          help="negation cue bonus weight (default 0.1)")
    p_ground.add_argument("--cue-cap", type=int, default=6, help="cue count cap (default 6)")
    p_ground.add_argument("--con-threshold", type=float, default=0.35,
                          help="contradiction probability threshold (default 0.35)")
    p_ground.add_argument("--full-ranking", action="store_true",
                          help="write full branch rankings, not just top-3")
    p_ground.add_argument("--jobs", type=int, default=1)
    p_ground.set_defaults(func=cmd_ground)

    p_attr = sub.add_parser("attribute", help="run the attribution pipeline")
    p_attr.add_argument("--topics", required=True)
    p_attr.add_argument("--corpus", required=True)
    p_attr.add_argument("--mode", choices=("replay", "remote"), default="replay")
    p_attr.add_argument("--replay-file", default="")
    p_attr.add_argument("--backend", choices=("mock", "remote"), default="mock")
    p_attr.add_argument("--endpoint", default="")
    p_attr.add_argument("--timeout", type=float, default=60.0)
    p_attr.add_argument("--templates-constraints", default="")
    p_attr.add_argument("--templates-exemplar", default="")
    p_attr.add_argument("--negation-patterns", default="")
    p_attr.add_argument("--out", required=True)
    p_attr.add_argument("--jobs", type=int, default=1)
    p_attr.set_defaults(func=cmd_attribute)

    p_val = sub.add_parser("validate", help="validate an answers file")
    p_val.add_argument("--answers", required=True)
    p_val.set_defaults(func=cmd_validate)

    p_eval = sub.add_parser("eval", help="evaluate runs or answers")
    p_eval.add_argument("metric", choices=("mrr", "citations"))
    p_eval.add_argument("--run", action="append", default=[], help="run file (repeatable)")
    p_eval.add_argument("--gold", default="", help="gold labels file")
    p_eval.add_argument("--answers", default="", help="answers file (citations metric)")
    p_eval.add_argument("--mode", choices=(evalkit.RANK_LIST, evalkit.TOP3),
                        default=evalkit.RANK_LIST)
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, corpus_mod.CorpusError, lexindex.IndexError_, negation.PatternError,
            fusion.TemplateError, grounding.VariantError, attribution.TemplateError,
            attribution.ReplayError, evalkit.EvaluationError, scorers.BackendError,
            scorers.ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
