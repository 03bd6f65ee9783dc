"""Command-line entry point: ``readmefeat <subcommand> ...``.

Exit status is 0 on success, 1 on validation errors and 2 on I/O or
transport failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .agree import cohen_kappa, load_ratings_csv, rating_distribution
from .align import SWEEP_THRESHOLDS, Scheme
from .corpus import (
    ConfigError,
    CorpusError,
    CorpusRecord,
    SplitSpec,
    load_corpus,
    make_inference_prompt,
    make_training_example,
    parse_feature_list,
    save_corpus,
    save_predictions,
    scrub_pii,
    split_corpus,
    strip_markdown,
)
from .embed import EmbedderSpec, EmbedError
from .evaluate import EvalConfig, EvaluationError, MetricReport, render_report, run_evaluation
from .ingest import FixtureTransport, GitHubClient, IngestError, RecordingTransport, crawl
from .ingest import feature_count_stats, license_distribution

log = logging.getLogger("readmefeat")

_SCHEME_ALIASES = {"one2one": Scheme.ONE_TO_ONE, "many2one": Scheme.MANY_TO_ONE, "weighted": Scheme.WEIGHTED}


def _thresholds(value: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {value!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty threshold list")
    return out


def _schemes(value: str) -> tuple[Scheme, ...]:
    try:
        return tuple(_SCHEME_ALIASES[v.strip()] for v in value.split(",") if v.strip())
    except KeyError as exc:
        raise argparse.ArgumentTypeError(f"unknown scheme {exc.args[0]!r}") from None


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
    return rows


def cmd_ingest(args) -> int:
    if args.fixtures and args.live:
        raise ConfigError("--fixtures and --live are mutually exclusive")
    if args.fixtures:
        transport = FixtureTransport(args.fixtures)
    elif args.live:
        transport = RecordingTransport(args.record) if args.record else None
    else:
        raise ConfigError("pass --fixtures DIR for recorded responses or --live for the GitHub API")
    with GitHubClient(transport=transport, max_concurrency=args.workers) as client:
        repos = list(args.repos)
        if args.sample:
            repos += client.sample_repositories(args.sample, seed=args.seed)
        records, skipped = crawl(
            client, repos, keep_code=args.keep_code, name_patterns=args.name_pattern, workers=args.workers
        )
    for repo_id, reason in sorted(skipped.items()):
        log.info("skipped %s: %s", repo_id, reason)
    save_corpus(records, args.out)
    print(f"wrote {len(records)} records to {args.out} ({len(skipped)} skipped)")
    return 0


def cmd_preprocess(args) -> int:
    records = load_corpus(args.corpus)
    cleaned = [
        CorpusRecord(
            repo_id=r.repo_id,
            readme_text=scrub_pii(strip_markdown(r.readme_text, keep_code=args.keep_code), args.name_pattern),
            license=r.license,
            extractive=r.extractive,
            abstractive=r.abstractive,
            url=r.url,
        )
        for r in records
    ]
    save_corpus(cleaned, args.out)
    print(f"wrote {len(cleaned)} records to {args.out}")
    return 0


def cmd_split(args) -> int:
    records = load_corpus(args.corpus)
    parts = split_corpus(records, SplitSpec(args.train, args.val, args.test, args.seed))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in zip(("train", "val", "test"), parts):
        save_corpus(part, out_dir / f"{name}.jsonl")
        print(f"{name}: {len(part)}")
    return 0


def cmd_make_train(args) -> int:
    records = load_corpus(args.corpus)
    lines = []
    for r in records:
        text = make_inference_prompt(r) if args.inference else make_training_example(r, args.target)
        lines.append(json.dumps({"repo_id": r.repo_id, "text": text}, ensure_ascii=False))
    _write("".join(line + "\n" for line in lines), args.out)
    return 0


def cmd_parse_preds(args) -> int:
    preds = {}
    for row in _read_jsonl(args.generations):
        try:
            preds[row["repo_id"]] = parse_feature_list(row[args.field])
        except KeyError as exc:
            raise CorpusError(f"{args.generations}: missing field {exc}") from None
    save_predictions(preds, args.out)
    print(f"wrote {len(preds)} predictions to {args.out}")
    return 0


def cmd_eval(args) -> int:
    if args.embedder == "http":
        spec = EmbedderSpec("http-service", 0, args.endpoint)
    else:
        spec = EmbedderSpec("builtin-hash", args.dim)
    config = EvalConfig(
        thresholds=args.threshold,
        schemes=args.schemes,
        embedder=spec,
        gold=args.gold,
        workers=args.workers,
        model_name=args.model_name or Path(args.predictions).stem,
    )
    report = run_evaluation(args.corpus, args.predictions, config)
    _write(render_report(report, args.format), args.out)
    return 0


def cmd_kappa(args) -> int:
    sheets = load_ratings_csv(args.ratings)
    ids = [args.a, args.b] if args.a and args.b else sorted(sheets)
    if len(ids) != 2:
        raise ConfigError(f"need exactly two annotators, found {len(ids)}: pass --a and --b")
    for aid in ids:
        if aid not in sheets:
            raise ConfigError(f"annotator {aid!r} not in {args.ratings}")
    a, b = sheets[ids[0]], sheets[ids[1]]
    overlap = len(a.ratings.keys() & b.ratings.keys())
    print(f"kappa({a.annotator_id}, {b.annotator_id}) = {cohen_kappa(a, b):.3f} over {overlap} shared items")
    for sheet in (a, b):
        dist = rating_distribution(sheet)
        print(f"{sheet.annotator_id}: " + " ".join(f"{r}:{n}" for r, n in dist.items()))
    return 0


def cmd_stats(args) -> int:
    records = load_corpus(args.corpus)
    print("| License | Count | Count Percentage(%) |")
    print("|---|---|---|")
    for row in license_distribution(records):
        print(f"| {row.license.value} | {row.count} | {row.percent:.2f} |")
    if any(r.extractive for r in records):
        stats = feature_count_stats(records)
        print(f"\nfeatures per repository: mean {stats.mean:.2f}, max {stats.max}")
        for count, n in stats.histogram.items():
            print(f"  {count:>3}: {n}")
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.reports:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        reports.extend(MetricReport.from_json(o) for o in (obj if isinstance(obj, list) else [obj]))
    _write(render_report(reports, args.format), args.out)
    return 0


class _Parser(argparse.ArgumentParser):
    # usage mistakes are validation errors, not I/O errors
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="readmefeat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="fetch README text for permissively licensed repositories")
    p.add_argument("repos", nargs="*", help="owner/name ids")
    p.add_argument("--sample", type=int, default=0, help="additionally sample N random repositories")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixtures", help="replay recorded responses from this directory")
    p.add_argument("--live", action="store_true", help="talk to the GitHub API (uses GITHUB_TOKEN)")
    p.add_argument("--record", help="with --live, save responses as fixtures here")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--keep-code", action="store_true")
    p.add_argument("--name-pattern", action="append", default=[], help="regex replaced by [NAME]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("preprocess", help="strip markdown and scrub PII in a corpus")
    p.add_argument("corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--keep-code", action="store_true")
    p.add_argument("--name-pattern", action="append", default=[])
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("split", help="seeded train/val/test split")
    p.add_argument("corpus")
    p.add_argument("--train", type=int, required=True)
    p.add_argument("--val", type=int, required=True)
    p.add_argument("--test", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("make-train", help="format fine-tuning examples or inference prompts")
    p.add_argument("corpus")
    p.add_argument("--target", choices=("extractive", "abstractive"), default="extractive")
    p.add_argument("--inference", action="store_true", help="emit prompts without gold features")
    p.add_argument("--out")
    p.set_defaults(func=cmd_make_train)

    p = sub.add_parser("parse-preds", help="turn raw generations into a predictions file")
    p.add_argument("generations", help='JSONL with {"repo_id", "generation"}')
    p.add_argument("--field", default="generation")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_parse_preds)

    p = sub.add_parser("eval", help="score predictions against gold features")
    p.add_argument("corpus")
    p.add_argument("predictions")
    p.add_argument("--threshold", type=_thresholds, default=(SWEEP_THRESHOLDS[0],))
    p.add_argument("--schemes", type=_schemes, default=tuple(Scheme))
    p.add_argument("--embedder", choices=("builtin", "http"), default="builtin")
    p.add_argument("--endpoint")
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--gold", choices=("extractive", "abstractive"), default="extractive")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--model-name")
    p.add_argument("--format", choices=("markdown", "csv", "json"), default="markdown")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("kappa", help="Cohen's kappa between two validators")
    p.add_argument("ratings", help="CSV with repo_id,annotator_id,rating")
    p.add_argument("--a")
    p.add_argument("--b")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("stats", help="license distribution and feature counts")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("report", help="render saved JSON reports side by side")
    p.add_argument("reports", nargs="+")
    p.add_argument("--format", choices=("markdown", "csv", "json"), default="markdown")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (OSError, IngestError, EmbedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CorpusError, ConfigError, EvaluationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
