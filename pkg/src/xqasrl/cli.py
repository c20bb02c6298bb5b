"""Command-line entry point.

Subcommands cover the full workflow: ingest a CoNLL-U corpus, run fixture-
backed projection, inspect dataset stats, emit training / few-shot prompt
data, score predictions, calibrate thresholds, run paired bootstrap tests,
sweep the semantic threshold, and serve the curation API.

Exit codes: 0 success, 1 usage, 2 data problem, 3 provider failure. Errors
are printed to stderr as ``error[usage]: ...``, ``error[data]: ...`` or
``error[provider]: ...``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    IOU_SWEEP,
    SEMANTIC_SWEEP,
    SENSITIVITY_SWEEP,
    BootstrapError,
    CalibrationError,
    Sweep,
    calibrate_iou_threshold,
    calibrate_semantic_threshold,
    paired_bootstrap,
    read_samples,
    threshold_sensitivity,
)
from .corpus import ConlluParseError, PredicatePolicy, candidate_predicates, parse_conllu
from .curation import CurationError, CurationStore
from .dataset import (
    DatasetError,
    compute_stats,
    emit_icl_prompt,
    emit_training_examples,
    read_records,
    split_dataset,
    write_records,
)
from .evaluation import (
    EvalConfig,
    EvalError,
    aggregate,
    evaluate_records,
    read_reports,
    write_reports,
)
from .fixtures import (
    FixtureConstrainedTranslator,
    FixtureNominalizationClassifier,
    FixturePredicateDetector,
    FixtureQasrlParser,
    FixtureQuestionEmbedder,
    FixtureTable,
    FixtureTranslator,
    FixtureWordAligner,
    HashEmbedder,
)
from .projection import ProjectedRecord, ProjectionConfig, project_corpus
from .providers import ProviderError, ProviderSet

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; we reserve 2 for data errors."""

    def error(self, message):
        raise UsageError(message)


def _print_json(obj) -> None:
    print(json.dumps(obj, ensure_ascii=False, indent=2))


def _sweep_from_args(args, default: Sweep) -> Sweep:
    lo = args.lo if args.lo is not None else default.lo
    hi = args.hi if args.hi is not None else default.hi
    step = args.step if args.step is not None else default.step
    return Sweep(lo, hi, step)


# -- subcommands ------------------------------------------------------------


def cmd_ingest(args) -> int:
    document = Path(args.corpus).read_text(encoding="utf-8")
    sentences = parse_conllu(document, args.language)
    policy = PredicatePolicy(include_aux=args.include_aux)
    records = []
    for sentence in sentences:
        for pred in candidate_predicates(sentence, policy):
            records.append(
                ProjectedRecord(sentence=sentence, predicate=pred, qas=(), provenance="projected")
            )
    write_records(records, args.output)
    print(f"ingested {len(sentences)} sentences, {len(records)} predicate candidates -> {args.output}")
    return EXIT_OK


def _fixture_providers(fixtures_dir: Path) -> ProviderSet:
    def table(name: str, required: bool) -> FixtureTable | None:
        path = fixtures_dir / f"{name}.json"
        if not path.exists():
            if required:
                raise DatasetError(f"missing fixture table {path}")
            return None
        return FixtureTable.load(path)

    nomclass = table("nomclass", required=False)
    embed = table("embed", required=False)
    return ProviderSet(
        translator=FixtureTranslator(table("translate", required=True)),
        parser=FixtureQasrlParser(table("parse", required=True)),
        detector=FixturePredicateDetector(table("detect", required=True)),
        aligner=FixtureWordAligner(table("align", required=True)),
        constrained_translator=FixtureConstrainedTranslator(table("ctranslate", required=True)),
        embedder=FixtureQuestionEmbedder(embed) if embed else None,
        nominalization_classifier=FixtureNominalizationClassifier(nomclass) if nomclass else None,
    )


def cmd_project(args) -> int:
    fixtures_dir = Path(args.fixtures)
    corpus_path = Path(args.corpus) if args.corpus else fixtures_dir / "sentences.conllu"
    document = corpus_path.read_text(encoding="utf-8")
    sentences = parse_conllu(document, args.language)
    providers = _fixture_providers(fixtures_dir)
    config = ProjectionConfig(
        constrained_translation_retries=args.retries,
        allow_affixed_predicate_match=args.affix,
    )
    audit: list = []
    records = project_corpus(sentences, providers, config=config, audit=audit)
    write_records(records, args.output)
    dropped = sum(len(r.dropped_qas) for r in records)
    print(
        f"projected {len(records)} records ({sum(len(r.qas) for r in records)} QAs, "
        f"{dropped} dropped QAs, {len(audit)} audit events) -> {args.output}"
    )
    if args.audit:
        with open(args.audit, "w", encoding="utf-8") as fh:
            for event in audit:
                fh.write(json.dumps(event.to_dict(), ensure_ascii=False))
                fh.write("\n")
    return EXIT_OK


def cmd_stats(args) -> int:
    records = read_records(args.records)
    _print_json(compute_stats(records).to_dict())
    return EXIT_OK


def cmd_emit_train(args) -> int:
    records = read_records(args.records)
    if args.split:
        train, dev, test = split_dataset(records, seed=args.seed)
        parts = {"train": train.records, "dev": dev.records, "test": test.records}
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        for split, recs in parts.items():
            path = out_dir / f"{split}.jsonl"
            with open(path, "w", encoding="utf-8") as fh:
                for example in emit_training_examples(recs):
                    fh.write(json.dumps(example, ensure_ascii=False))
                    fh.write("\n")
            print(f"{split}: {len(recs)} records -> {path}")
    else:
        examples = emit_training_examples(records)
        with open(args.output, "w", encoding="utf-8") as fh:
            for example in examples:
                fh.write(json.dumps(example, ensure_ascii=False))
                fh.write("\n")
        print(f"{len(examples)} training examples -> {args.output}")
    return EXIT_OK


def cmd_emit_icl(args) -> int:
    records = read_records(args.records)
    with open(args.output, "w", encoding="utf-8") as fh:
        for record in records:
            prompt = emit_icl_prompt(
                record.sentence, record.predicate.token_index, record.predicate.kind
            )
            fh.write(json.dumps({"id": record.record_id, "prompt": prompt}, ensure_ascii=False))
            fh.write("\n")
    print(f"{len(records)} prompts -> {args.output}")
    return EXIT_OK


def _embedder_from_args(args):
    if getattr(args, "embed_fixture", None):
        return FixtureQuestionEmbedder(FixtureTable.load(args.embed_fixture))
    return HashEmbedder()


def cmd_evaluate(args) -> int:
    pred = read_records(args.pred)
    gold = read_records(args.gold)
    config = EvalConfig(tau=args.tau, theta=args.theta, exact_normalization=args.exact)
    reports = evaluate_records(pred, gold, config, embedder=_embedder_from_args(args))
    if args.report:
        write_reports(reports, args.report)
    _print_json(aggregate(reports).to_dict())
    return EXIT_OK


def cmd_calibrate(args) -> int:
    samples = read_samples(args.samples)
    if args.metric == "iou":
        curve = calibrate_iou_threshold(samples, sweep=_sweep_from_args(args, IOU_SWEEP))
    else:
        curve = calibrate_semantic_threshold(
            samples, beta=args.beta, sweep=_sweep_from_args(args, SEMANTIC_SWEEP)
        )
    _print_json(curve.to_dict())
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    reports_a = read_reports(args.system_a)
    reports_b = read_reports(args.system_b)
    result = paired_bootstrap(
        reports_a,
        reports_b,
        metric=args.metric,
        iterations=args.iterations,
        seed=args.seed,
        jobs=args.jobs,
    )
    _print_json(result.to_dict())
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    systems = {}
    for spec_arg in args.reports:
        name, _, path = spec_arg.partition("=")
        if not name or not path:
            raise UsageError(f"--reports expects NAME=PATH, got {spec_arg!r}")
        if name in systems:
            raise UsageError(f"duplicate system name {name!r}")
        systems[name] = read_reports(path)
    table = threshold_sensitivity(systems, sweep=_sweep_from_args(args, SENSITIVITY_SWEEP))
    _print_json(table.to_rows())
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    store = CurationStore.load(args.data_dir)
    if args.import_records:
        records = read_records(args.import_records)
        added = store.import_records(records)
        print(f"imported {added} records from {args.import_records}")
    app = create_app(store, static_dir=args.static, auth_token_env=args.auth_token_env)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xqasrl", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="enumerate predicate candidates from a CoNLL-U corpus")
    p.add_argument("corpus")
    p.add_argument("--language", required=True)
    p.add_argument("--include-aux", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("project", help="run the projection pipeline against fixture tables")
    p.add_argument("--fixtures", required=True, help="directory holding <op>.json fixture tables")
    p.add_argument("--corpus", help="CoNLL-U path (default: sentences.conllu inside --fixtures)")
    p.add_argument("--language", required=True)
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--affix", action="store_true", help="accept clitic-prefixed predicate forms")
    p.add_argument("--audit", help="write audit events as JSONL")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("stats", help="count sentences / predicates / QAs in a dataset")
    p.add_argument("records")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("emit-train", help="emit question-answer training pairs")
    p.add_argument("records")
    p.add_argument("--split", action="store_true", help="write train/dev/test under --output dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_emit_train)

    p = sub.add_parser("emit-icl", help="emit few-shot prompts, one per record")
    p.add_argument("records")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_emit_icl)

    p = sub.add_parser("evaluate", help="score predictions against gold records")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=0.78)
    p.add_argument("--exact", choices=["fold", "strict"], default="fold")
    p.add_argument("--embed-fixture", help="fixture table for question embeddings")
    p.add_argument("--report", help="write per-predicate match reports as JSONL")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="sweep a threshold over labeled match samples")
    p.add_argument("--samples", required=True)
    p.add_argument("--metric", choices=["iou", "semantic"], required=True)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--step", type=float)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bootstrap", help="paired bootstrap significance test on two report files")
    p.add_argument("--system-a", required=True)
    p.add_argument("--system-b", required=True)
    p.add_argument("--metric", choices=["unlabeled", "exact", "semantic"], default="semantic")
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("sensitivity", help="semantic-threshold sensitivity across systems")
    p.add_argument("--reports", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--step", type=float)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("serve", help="run the curation HTTP service")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory of UI assets to mount at /")
    p.add_argument("--auth-token-env", help="env var carrying the bearer token to require")
    p.add_argument("--import-records", help="JSONL records to import before serving")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error[usage]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error[usage]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProviderError as exc:
        print(f"error[provider]: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (
        DatasetError,
        ConlluParseError,
        CalibrationError,
        BootstrapError,
        EvalError,
        CurationError,
        OSError,
        json.JSONDecodeError,
        ValueError,
    ) as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
