"""Operator command line: vocab checks, ingest, extract, search, flow, serve, eval.

Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
With --json each command prints exactly one JSON document on success.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import evalkit, retrieval
from .errors import (
    DuplicateError,
    ExtractionError,
    InputError,
    ProviderError,
    UisearchError,
)
from .extraction import ExtractionConfig, extract_semantics, load_image, mock_extract
from .providers import (
    EmbeddingProvider,
    HttpEmbeddingProvider,
    HttpMllmClient,
    MllmClient,
    MockEmbeddingProvider,
    MockMllmClient,
    ProviderSettings,
)
from .retrieval import (
    FacetClause,
    FlowDirection,
    MissingFacetPolicy,
    SemanticQuery,
    flow_search,
    response_to_payload,
    result_to_payload,
    search,
)
from .schema import (
    FacetId,
    VocabularySet,
    default_vocabulary,
    load_vocabulary_path,
    serialize_record,
    validate_record,
)
from .store import VectorStore, index_screen, load_store, record_to_plain, save_store

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".webp")
MOCK_DIMENSION = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _vocab_from_args(args: argparse.Namespace) -> VocabularySet:
    if getattr(args, "vocab", None):
        return load_vocabulary_path(args.vocab)
    return default_vocabulary()


def _mock_seed(args: argparse.Namespace) -> int:
    return getattr(args, "seed", 0) or 0


def _embedder_for_tag(tag: str, dimension: int) -> EmbeddingProvider:
    """Rebuild the provider a store was created with from its tag."""
    if tag.startswith("mock:"):
        _, seed, dim = tag.split(":")
        return MockEmbeddingProvider(dimension=int(dim), seed=int(seed))
    settings = ProviderSettings.from_env("UISEARCH_EMBED")
    provider = HttpEmbeddingProvider(settings, dimension)
    if provider.tag != tag:
        raise InputError(f"configured provider {provider.tag!r} does not match store {tag!r}")
    return provider


def _mllm_for_args(args: argparse.Namespace, vocab: VocabularySet) -> MllmClient:
    if args.mock:
        return MockMllmClient(vocab=vocab, seed=_mock_seed(args))
    return HttpMllmClient(ProviderSettings.from_env("UISEARCH_MLLM"))


def _parse_clause(raw: str) -> FacetClause:
    if "=" not in raw:
        raise UsageError(f"clause must look like facet=text[:weight], got {raw!r}")
    facet_name, rest = raw.split("=", 1)
    weight = 1.0
    if ":" in rest:
        head, tail = rest.rsplit(":", 1)
        try:
            weight = float(tail)
            rest = head
        except ValueError:
            pass  # the colon belongs to the text
    try:
        facet = FacetId(facet_name.strip())
    except ValueError:
        raise UsageError(f"unknown facet: {facet_name.strip()!r}")
    if not rest:
        raise UsageError(f"{facet_name}: clause text is empty")
    return FacetClause(facet, rest, weight)


def _emit(args: argparse.Namespace, document: dict, human: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(document, ensure_ascii=False))
    else:
        print(human)


# --- subcommands -----------------------------------------------------------


def _cmd_vocab_check(args: argparse.Namespace) -> int:
    vocab = load_vocabulary_path(args.file)
    sizes = {name: len(vocab.section(name)) for name in
             ("app_categories", "screen_categories", "ui_element_types",
              "layouts", "moods", "color_schemes", "html_color_names")}
    _emit(args, {"ok": True, "sections": sizes},
          "\n".join(f"{name}: {count} entries" for name, count in sizes.items()))
    return 0


def _cmd_extract(args: argparse.Namespace) -> int:
    vocab = _vocab_from_args(args)
    data = Path(args.image).read_bytes()
    if args.mock:
        record = mock_extract(hashlib.sha256(data).digest(), _mock_seed(args), vocab)
        attempts, degraded = 1, False
    else:
        image = load_image(data)
        config = ExtractionConfig(transcript_dir=args.transcript_dir,
                                  transcript_label=Path(args.image).stem)
        outcome = extract_semantics(image, _mllm_for_args(args, vocab), vocab, config)
        record, attempts, degraded = outcome.record, outcome.attempts, outcome.degraded
    report = validate_record(record, vocab)
    if args.json:
        print(json.dumps({
            "record": record_to_plain(record),
            "attempts": attempts,
            "degraded": degraded,
            "is_valid": report.is_valid,
            "soft_warnings": [[f.value, m, c] for f, m, c in report.soft_warnings],
        }, ensure_ascii=False))
    else:
        print(serialize_record(record), end="")
        for facet, message, coercion in report.soft_warnings:
            hint = f" (try: {coercion})" if coercion else ""
            print(f"warning: {facet}: {message}{hint}", file=sys.stderr)
    return 0


def _cmd_ingest(args: argparse.Namespace) -> int:
    vocab = _vocab_from_args(args)
    source = Path(args.directory)
    if not source.is_dir():
        raise InputError(f"not a directory: {source}")
    files = sorted(p for p in source.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise InputError(f"no image files in {source}")

    store_dir = Path(args.store)
    if (store_dir / "manifest.json").exists():
        store = load_store(store_dir)
        embedder = _embedder_for_tag(store.provider_tag, store.dimension)
    else:
        if args.mock:
            embedder = MockEmbeddingProvider(dimension=args.dimension, seed=_mock_seed(args))
        else:
            settings = ProviderSettings.from_env("UISEARCH_EMBED")
            embedder = HttpEmbeddingProvider(settings, args.dimension)
        store = VectorStore(embedder.dimension, embedder.tag)
    mllm = _mllm_for_args(args, vocab)

    def extract_one(path: Path):
        data = path.read_bytes()
        if args.mock:
            # digest of the file bytes keys the mock record; no decode round-trip
            load_image(data)
            return mock_extract(hashlib.sha256(data).digest(), _mock_seed(args), vocab)
        outcome = extract_semantics(load_image(data), mllm, vocab, ExtractionConfig())
        return outcome.record

    indexed, skipped = 0, 0
    records: dict[Path, object] = {}
    with ThreadPoolExecutor(max_workers=max(1, args.parallel)) as pool:
        futures = {path: pool.submit(extract_one, path) for path in files}
        for path in files:
            try:
                records[path] = futures[path].result()
            except InputError as exc:
                print(f"skip {path.name}: {exc}", file=sys.stderr)
                skipped += 1
            except (ProviderError, ExtractionError):
                raise

    for path in files:
        record = records.get(path)
        if record is None:
            continue
        try:
            entry = index_screen(store, record, path.name, embedder)
        except DuplicateError:
            print(f"skip {path.name}: already indexed", file=sys.stderr)
            skipped += 1
            continue
        indexed += 1
        print(f"indexed {entry.id}  {path.name}", file=sys.stderr)

    save_store(store, store_dir)
    _emit(args, {"indexed": indexed, "skipped": skipped, "count": len(store),
                 "store": str(store_dir)},
          f"indexed {indexed} screens ({skipped} skipped); store now holds {len(store)}")
    return 0


def _load_store_and_embedder(path: str) -> tuple[VectorStore, EmbeddingProvider]:
    store = load_store(path)
    return store, _embedder_for_tag(store.provider_tag, store.dimension)


def _cmd_search(args: argparse.Namespace) -> int:
    if not args.clause:
        raise UsageError("at least one --clause facet=text[:weight] is required")
    clauses = tuple(_parse_clause(raw) for raw in args.clause)
    query = SemanticQuery(clauses, k=args.k,
                          missing_facet_policy=MissingFacetPolicy(args.policy))
    store, embedder = _load_store_and_embedder(args.store)
    response = search(store, query, embedder)
    payload = response_to_payload(response)
    if args.json:
        print(json.dumps(payload, ensure_ascii=False))
    else:
        print(f"overall top {len(response.overall)} of {len(store)} screens:")
        for rank, result in enumerate(response.overall, 1):
            print(f"  {rank:2d}. {result.screen_id}  {result.overall_score:.6f}")
        for facet, results in response.per_facet.items():
            print(f"{facet.value}:")
            for rank, result in enumerate(results, 1):
                print(f"  {rank:2d}. {result.screen_id}  {result.overall_score:.6f}")
    return 0


def _cmd_flow(args: argparse.Namespace) -> int:
    store, embedder = _load_store_and_embedder(args.store)
    results = flow_search(store, args.id, FlowDirection(args.direction),
                          k=args.k, provider=embedder)
    payload = {"source_screen_id": args.id, "direction": args.direction,
               "results": [result_to_payload(r) for r in results]}
    human = [f"{args.direction} of {args.id}:"]
    human += [f"  {i:2d}. {r.screen_id}  {r.overall_score:.6f}"
              for i, r in enumerate(results, 1)]
    _emit(args, payload, "\n".join(human))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceConfig, ServiceState, create_app

    vocab = _vocab_from_args(args)
    store, embedder = _load_store_and_embedder(args.store)
    mllm = _mllm_for_args(args, vocab)
    state = ServiceState(
        store=store, vocab=vocab, mllm=mllm, embedder=embedder,
        config=ServiceConfig(cors_origin=args.cors_origin, persist_dir=args.store,
                             image_root=args.image_root),
    )
    uvicorn.run(create_app(state), host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_eval_classify(args: argparse.Namespace) -> int:
    samples = evalkit.load_classification_samples(args.predictions)
    labels = evalkit.load_label_set(args.labels)
    report = evalkit.per_class_classification_report(samples, labels)
    try:
        ks = [int(k) for k in args.k.split(",") if k.strip()]
    except ValueError:
        raise UsageError(f"--k expects integers like 1,3 (got {args.k!r})")
    overall = {f"top{k}_accuracy": evalkit.topk_accuracy(samples, k) for k in ks}
    report = evalkit.MetricReport(overall=overall, per_class=report.per_class,
                                  flags=report.flags)
    _emit(args, evalkit.report_to_json(report), evalkit.format_report_table(report))
    return 0


def _cmd_eval_elements(args: argparse.Namespace) -> int:
    samples = evalkit.load_multilabel_samples(args.predictions)
    labels = evalkit.load_label_set(args.labels)
    excluded = {e.strip() for e in args.exclude.split(",") if e.strip()} if args.exclude else set()
    samples = evalkit.apply_label_exclusions(samples, excluded)
    labels = [l for l in labels if l not in excluded]
    report = evalkit.multilabel_prf(samples, labels)
    _emit(args, evalkit.report_to_json(report), evalkit.format_report_table(report))
    return 0


# --- wiring ----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="uisearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    vocab_cmd = sub.add_parser("vocab", help="vocabulary utilities")
    vocab_sub = vocab_cmd.add_subparsers(dest="vocab_command", required=True)
    check = vocab_sub.add_parser("check", help="validate a vocabulary file")
    check.add_argument("file")
    check.add_argument("--json", action="store_true")
    check.set_defaults(func=_cmd_vocab_check)

    extract = sub.add_parser("extract", help="extract a semantic record from one image")
    extract.add_argument("image")
    extract.add_argument("--mock", action="store_true")
    extract.add_argument("--seed", type=int, default=0)
    extract.add_argument("--vocab")
    extract.add_argument("--transcript-dir")
    extract.add_argument("--json", action="store_true")
    extract.set_defaults(func=_cmd_extract)

    ingest = sub.add_parser("ingest", help="extract and index every image in a directory")
    ingest.add_argument("directory")
    ingest.add_argument("--store", required=True)
    ingest.add_argument("--mock", action="store_true")
    ingest.add_argument("--seed", type=int, default=0)
    ingest.add_argument("--vocab")
    ingest.add_argument("--dimension", type=int, default=MOCK_DIMENSION)
    ingest.add_argument("--parallel", type=int, default=2)
    ingest.add_argument("--json", action="store_true")
    ingest.set_defaults(func=_cmd_ingest)

    search_cmd = sub.add_parser("search", help="run a weighted multi-facet query")
    search_cmd.add_argument("--store", required=True)
    search_cmd.add_argument("--clause", action="append", default=[],
                            metavar="facet=text[:weight]")
    search_cmd.add_argument("-k", type=int, default=retrieval.DEFAULT_RESULT_COUNT)
    search_cmd.add_argument("--policy", choices=[p.value for p in MissingFacetPolicy],
                            default=MissingFacetPolicy.PENALIZE_ZERO.value)
    search_cmd.add_argument("--json", action="store_true")
    search_cmd.set_defaults(func=_cmd_search)

    flow = sub.add_parser("flow", help="find likely next/previous screens")
    flow.add_argument("--store", required=True)
    flow.add_argument("--id", required=True)
    flow.add_argument("--direction", choices=[d.value for d in FlowDirection], required=True)
    flow.add_argument("-k", type=int, default=retrieval.DEFAULT_RESULT_COUNT)
    flow.add_argument("--json", action="store_true")
    flow.set_defaults(func=_cmd_flow)

    serve = sub.add_parser("serve", help="serve the HTTP API")
    serve.add_argument("--store", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8070)
    serve.add_argument("--vocab")
    serve.add_argument("--mock", action="store_true")
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--cors-origin", default="*")
    serve.add_argument("--image-root", help="directory that relative image refs resolve against")
    serve.set_defaults(func=_cmd_serve)

    eval_cmd = sub.add_parser("eval", help="evaluation metrics")
    eval_sub = eval_cmd.add_subparsers(dest="eval_command", required=True)
    classify = eval_sub.add_parser("classify", help="top-1/top-3 classification report")
    classify.add_argument("predictions")
    classify.add_argument("--labels", required=True)
    classify.add_argument("--k", default="1,3", help="comma-separated accuracy cutoffs")
    classify.add_argument("--json", action="store_true")
    classify.set_defaults(func=_cmd_eval_classify)
    elements = eval_sub.add_parser("elements", help="support-weighted multi-label P/R/F1")
    elements.add_argument("predictions")
    elements.add_argument("--labels", required=True)
    elements.add_argument("--exclude", default="")
    elements.add_argument("--json", action="store_true")
    elements.set_defaults(func=_cmd_eval_elements)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ProviderError, ExtractionError) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return 3
    except (UisearchError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
