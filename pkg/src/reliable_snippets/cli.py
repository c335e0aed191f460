"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 remote classifier failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .corpus import VIEWPOINTS, CorpusError, Document, ingest_corpus, iter_jsonl, regroup
from .evaluate import build_report, load_annotations, render_text
from .extract import DEFAULT_CROP_LIMIT, Caption, ExtractionError, crop, extract_snippet
from .preprocess import DEFAULT_WINDOW_WORDS, NoRelevantWindowError
from .relevance import DEFAULT_B, DEFAULT_K1
from .remote import ENDPOINT_ENV, RemoteClassifier, RemoteClassifierError
from .serpgen import DEFAULT_QUERY_TEMPLATE, build_page, render
from .viewpoint import BaselineModel, Hyperparams, train_baseline

log = logging.getLogger("reliable_snippets")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_REMOTE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reliable-snippets", description="Viewpoint-focused snippet extraction and evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr (repeatable)")
    common.add_argument("--config", help="JSON file of option defaults keyed by option name; flags win")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common], help="validate a corpus file")
    p.add_argument("--corpus", required=True, help="corpus JSONL")

    p = sub.add_parser("train", parents=[common], help="train the baseline viewpoint classifier")
    p.add_argument("--corpus", required=True, help="labeled corpus JSONL")
    p.add_argument("--out", required=True, help="model JSON to write")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=Hyperparams.epochs)
    p.add_argument("--lr", type=float, default=Hyperparams.learning_rate, help="learning rate")
    p.add_argument("--l2", type=float, default=Hyperparams.l2, help="L2 penalty")

    p = sub.add_parser("extract", parents=[common], help="extract one snippet per document")
    p.add_argument("--corpus", required=True, help="corpus JSONL")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", help="baseline model JSON")
    src.add_argument("--endpoint", help=f"remote classifier URL (default from ${ENDPOINT_ENV})")
    p.add_argument("--out", required=True, help="snippet JSONL to write")
    p.add_argument("--errors", help="per-document error sidecar (default: <out>.errors.jsonl)")
    p.add_argument("--bm25-k1", type=float, default=DEFAULT_K1)
    p.add_argument("--bm25-b", type=float, default=DEFAULT_B)
    p.add_argument("--window-words", type=int, default=DEFAULT_WINDOW_WORDS)
    p.add_argument("--no-fallback", action="store_true", help="fail a document instead of falling back to the paragraph-filtered text")
    p.add_argument("--crop-limit", type=int, default=DEFAULT_CROP_LIMIT)
    p.add_argument("--jobs", type=int, default=1, help="documents processed in parallel")
    p.add_argument("--timeout", type=float, default=30.0, help="remote classifier timeout in seconds")

    p = sub.add_parser("evaluate", parents=[common], help="reliability report from caption annotations")
    p.add_argument("--annotations", required=True, help="annotation JSONL")
    p.add_argument("--methods", required=True, help="comma-separated method tags")
    p.add_argument("--chi2", nargs="*", default=[], metavar="A:B", help="method pairs to compare")
    p.add_argument("--yates", action="store_true", help="Yates continuity correction on 2x2 tables")
    p.add_argument("--out-dir", default=".", help="directory for report.json and report.txt")

    p = sub.add_parser("serp", parents=[common], help="render static SERP pages")
    p.add_argument("--corpus", required=True, help="corpus JSONL (titles, urls, queries)")
    p.add_argument("--snippets", required=True, help="snippet JSONL with doc_id and snippet")
    p.add_argument("--query-id", help="render only this query (default: all)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default="framework", help="method tag recorded in the page")
    p.add_argument("--query-template", default=DEFAULT_QUERY_TEMPLATE)
    p.add_argument("--crop-limit", type=int, default=DEFAULT_CROP_LIMIT)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        config = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(config, dict):
        raise UsageError(f"config {known.config} must hold a JSON object")
    config = {k.replace("-", "_"): v for k, v in config.items()}
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        for sp in action.choices.values():
            for a in sp._actions:
                if a.dest in config:
                    a.required = False
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in config.items() if k in dests})


def _require_file(path: str, what: str) -> None:
    if not Path(path).is_file():
        raise UsageError(f"{what} not found: {path}")


def _require_parent(path: str) -> None:
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise UsageError(f"output directory does not exist: {parent}")


def cmd_ingest(args) -> int:
    _require_file(args.corpus, "corpus")
    docs = ingest_corpus(args.corpus)
    labeled = sum(d.label is not None for d in docs)
    queries = len({d.ic.key() for d in docs})
    print(json.dumps({"documents": len(docs), "labeled": labeled, "queries": queries}))
    return EXIT_OK


def cmd_train(args) -> int:
    _require_file(args.corpus, "corpus")
    _require_parent(args.out)
    docs = ingest_corpus(args.corpus)
    examples = []
    for d in docs:
        if d.label is None:
            continue
        cls = regroup(d.label)
        if cls in VIEWPOINTS:
            examples.append((d.text, cls))
    log.info("training on %d of %d documents", len(examples), len(docs))
    try:
        model = train_baseline(examples, Hyperparams(args.epochs, args.lr, args.l2), seed=args.seed)
    except ValueError as exc:
        raise CorpusError(f"{args.corpus}: {exc}") from None
    model.save(args.out)
    return EXIT_OK


def _resolve_classifier(args):
    if args.model and args.endpoint:
        raise UsageError("exactly one of --model and --endpoint may be given")
    if args.model:
        _require_file(args.model, "model")
        try:
            return BaselineModel.load(args.model)
        except ValueError as exc:
            raise CorpusError(str(exc)) from None
    endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV)
    if not endpoint:
        raise UsageError(f"one of --model or --endpoint (or ${ENDPOINT_ENV}) is required")
    return RemoteClassifier(endpoint, timeout=args.timeout)


def _remote_cause(exc: BaseException) -> Optional[RemoteClassifierError]:
    while exc is not None:
        if isinstance(exc, RemoteClassifierError):
            return exc
        exc = exc.__cause__
    return None


def cmd_extract(args) -> int:
    _require_file(args.corpus, "corpus")
    _require_parent(args.out)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if args.crop_limit < 4:
        raise UsageError("--crop-limit must be at least 4")
    if args.window_words < 1:
        raise UsageError("--window-words must be positive")
    errors_path = args.errors or args.out + ".errors.jsonl"
    docs = ingest_corpus(args.corpus)
    model = _resolve_classifier(args)
    log.info("extracting %d documents with %s", len(docs), model.identity)

    def run(doc: Document):
        try:
            return extract_snippet(
                model,
                doc,
                window_words=args.window_words,
                k1=args.bm25_k1,
                b=args.bm25_b,
                fallback=not args.no_fallback,
                crop_limit=args.crop_limit,
            ), None
        except (ExtractionError, NoRelevantWindowError, ValueError) as exc:
            remote = _remote_cause(exc)
            if remote is not None:
                raise remote
            return None, {"doc_id": doc.id, "error": str(exc)}

    partial = args.out + ".partial"
    try:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool, open(partial, "w", encoding="utf-8") as fh:
            failures = []
            for result, failure in pool.map(run, docs):
                if result is not None:
                    fh.write(result.to_jsonl() + "\n")
                else:
                    failures.append(failure)
    except RemoteClassifierError:
        Path(partial).unlink(missing_ok=True)
        raise
    os.replace(partial, args.out)

    if failures:
        with open(errors_path, "w", encoding="utf-8") as fh:
            for f in failures:
                fh.write(json.dumps(f, ensure_ascii=False) + "\n")
        for f in failures:
            log.error("document %s: %s", f["doc_id"], f["error"])
        print(f"reliable-snippets extract: {len(failures)} of {len(docs)} documents failed; see {errors_path}", file=sys.stderr)
        return EXIT_DATA
    if os.path.exists(errors_path):
        os.remove(errors_path)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    _require_file(args.annotations, "annotations")
    out_dir = Path(args.out_dir)
    if not out_dir.is_dir():
        raise UsageError(f"output directory does not exist: {out_dir}")
    methods = [m for m in args.methods.split(",") if m]
    pairs = []
    for spec in args.chi2:
        a, sep, b = spec.partition(":")
        if not sep or not a or not b:
            raise UsageError(f"--chi2 expects A:B method pairs, got {spec!r}")
        pairs.append((a, b))
    records = load_annotations(args.annotations)
    try:
        report = build_report(records, methods, pairs, yates=args.yates)
    except ValueError as exc:
        raise CorpusError(f"{args.annotations}: {exc}") from None
    (out_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out_dir / "report.txt").write_text(render_text(report), encoding="utf-8")
    return EXIT_OK


def cmd_serp(args) -> int:
    _require_file(args.corpus, "corpus")
    _require_file(args.snippets, "snippets")
    out_dir = Path(args.out)
    if not out_dir.is_dir():
        raise UsageError(f"output directory does not exist: {out_dir}")
    docs = ingest_corpus(args.corpus)
    snippets: dict[str, str] = {}
    for lineno, obj in iter_jsonl(args.snippets):
        if not isinstance(obj, dict) or not isinstance(obj.get("doc_id"), str) or not isinstance(obj.get("snippet"), str):
            raise CorpusError(f"{args.snippets}: line {lineno}: expected doc_id and snippet strings")
        snippets[obj["doc_id"]] = obj["snippet"]

    queries: dict[str, list[Document]] = {}
    for d in docs:
        queries.setdefault(d.ic.query_id, []).append(d)
    if args.query_id is not None:
        if args.query_id not in queries:
            raise CorpusError(f"query id {args.query_id!r} not in corpus (have: {', '.join(sorted(queries))})")
        queries = {args.query_id: queries[args.query_id]}

    for qid, qdocs in queries.items():
        captions = [Caption(d.title, crop(snippets[d.id], args.crop_limit), d.url) for d in qdocs if d.id in snippets]
        missing = [d.id for d in qdocs if d.id not in snippets]
        if missing:
            log.warning("query %s: no snippet for %s", qid, ", ".join(missing))
        if not captions:
            raise CorpusError(f"query {qid!r}: empty SERP")
        ic = qdocs[0].ic
        page = build_page(captions, qid, args.seed, args.method, ic.intervention, ic.condition, args.query_template)
        (out_dir / f"{qid}.html").write_text(render(page), encoding="utf-8")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
    "serp": cmd_serp,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"reliable-snippets: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"reliable-snippets {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RemoteClassifierError as exc:
        print(f"reliable-snippets {args.command}: remote classifier failure: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except (CorpusError, ValueError, OSError) as exc:
        print(f"reliable-snippets {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
