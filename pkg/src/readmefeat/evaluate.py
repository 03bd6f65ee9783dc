"""Corpus-level evaluation of predicted feature lists and report rendering."""

from __future__ import annotations

import csv
import io
import json
import os
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .align import (
    SWEEP_THRESHOLDS,
    Scheme,
    SchemeScores,
    build_similarity_graph,
    match_many_to_one,
    match_one_to_one,
    scheme_scores,
    weight_many_to_one,
)
from .corpus import CorpusRecord, FeatureList, load_corpus, load_predictions
from .embed import EmbedderSpec, make_embedder
from .textmetrics import NO_MATCHED_PAIRS, PairScore, Score, aggregate_pair_metrics, score_pair

__all__ = [
    "EvaluationError",
    "EvalConfig",
    "ThresholdResult",
    "MetricReport",
    "evaluate_records",
    "run_evaluation",
    "render_report",
    "report_to_json",
    "TABLE_COLUMNS",
]


class EvaluationError(ValueError):
    pass


ALL_SCHEMES = (Scheme.ONE_TO_ONE, Scheme.MANY_TO_ONE, Scheme.WEIGHTED)


@dataclass(frozen=True)
class EvalConfig:
    thresholds: tuple[float, ...] = (SWEEP_THRESHOLDS[0],)
    schemes: tuple[Scheme, ...] = ALL_SCHEMES
    embedder: EmbedderSpec = field(default_factory=EmbedderSpec)
    gold: str = "extractive"
    workers: int = 1
    model_name: str = "model"

    def __post_init__(self) -> None:
        if not self.thresholds:
            raise EvaluationError("at least one threshold is required")
        for t in self.thresholds:
            if not 0.0 < t <= 1.0:
                raise EvaluationError(f"threshold {t} outside (0, 1]")
        if not self.schemes:
            raise EvaluationError("at least one scheme is required")
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        if self.gold not in ("extractive", "abstractive"):
            raise EvaluationError(f"unknown gold target {self.gold!r}")
        if self.workers < 1:
            raise EvaluationError("workers must be >= 1")

    def echo(self) -> dict:
        # workers is deliberately absent: it must not change report bytes
        return {
            "thresholds": [float(t) for t in self.thresholds],
            "schemes": [s.value for s in self.schemes],
            "embedder": self.embedder.to_json(),
            "gold": self.gold,
        }


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    n_records: int
    n_skipped_empty: int
    schemes: dict[Scheme, SchemeScores | None]
    pairs: dict[Scheme, PairScore | None]
    n_pairs: dict[Scheme, int]


@dataclass(frozen=True)
class MetricReport:
    model: str
    config: dict
    n_total: int
    results: tuple[ThresholdResult, ...]

    def to_json(self) -> dict:
        out: dict = {"model": self.model, "config": self.config, "n_total": self.n_total, "results": []}
        for res in self.results:
            out["results"].append(
                {
                    "threshold": res.threshold,
                    "n_records": res.n_records,
                    "n_skipped_empty": res.n_skipped_empty,
                    "schemes": {
                        s.value: (sc.to_json() if sc else None) for s, sc in res.schemes.items()
                    },
                    "pairs": {
                        s.value: (ps.to_json() if ps else NO_MATCHED_PAIRS) for s, ps in res.pairs.items()
                    },
                    "n_pairs": {s.value: n for s, n in res.n_pairs.items()},
                }
            )
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> MetricReport:
        def score(d: Mapping) -> Score:
            return Score(d["precision"], d["recall"], d["f1"])

        results = []
        for res in obj["results"]:
            t = res["threshold"]
            schemes = {
                Scheme(k): (SchemeScores(Scheme(k), v["precision"], v["recall"], v["f1"], t) if v else None)
                for k, v in res["schemes"].items()
            }
            pairs = {
                Scheme(k): (
                    PairScore(score(v["rouge1"]), score(v["rouge2"]), score(v["rougeL"]), score(v["semantic"]))
                    if isinstance(v, Mapping)
                    else None
                )
                for k, v in res["pairs"].items()
            }
            n_pairs = {Scheme(k): v for k, v in res.get("n_pairs", {}).items()}
            results.append(ThresholdResult(t, res["n_records"], res["n_skipped_empty"], schemes, pairs, n_pairs))
        return cls(obj["model"], dict(obj["config"]), obj["n_total"], tuple(results))


@dataclass
class _RecordOutcome:
    # per threshold: None when skipped, else (scheme scores, pair scores per scheme)
    by_threshold: list[tuple[dict[Scheme, SchemeScores], dict[Scheme, list[PairScore]]] | None]


def _evaluate_one(
    gen: FeatureList, gold: FeatureList, config: EvalConfig, embedder
) -> _RecordOutcome:
    outcomes: list = []
    pair_cache: dict[tuple[int, int], PairScore] = {}

    def pair_score(i: int, j: int) -> PairScore:
        if (i, j) not in pair_cache:
            pair_cache[(i, j)] = score_pair(gen[i], gold[j], embedder)
        return pair_cache[(i, j)]

    for threshold in config.thresholds:
        if not gen or not gold:
            outcomes.append(None)
            continue
        graph = build_similarity_graph(gen, gold, embedder, threshold)
        if not graph.edges:
            outcomes.append(None)
            continue
        matches = {}
        if Scheme.ONE_TO_ONE in config.schemes:
            matches[Scheme.ONE_TO_ONE] = match_one_to_one(graph)
        if Scheme.MANY_TO_ONE in config.schemes or Scheme.WEIGHTED in config.schemes:
            many = match_many_to_one(graph)
            if Scheme.MANY_TO_ONE in config.schemes:
                matches[Scheme.MANY_TO_ONE] = many
            if Scheme.WEIGHTED in config.schemes:
                matches[Scheme.WEIGHTED] = weight_many_to_one(many)
        scores = {s: scheme_scores(matches[s], len(gen), len(gold)) for s in config.schemes}
        pairs = {s: [pair_score(p.gen, p.gold) for p in matches[s].pairs] for s in config.schemes}
        outcomes.append((scores, pairs))
    return _RecordOutcome(outcomes)


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def evaluate_records(
    records: Sequence[CorpusRecord],
    predictions: Mapping[str, FeatureList],
    config: EvalConfig | None = None,
    embedder=None,
) -> MetricReport:
    """Score predictions against gold lists, macro-averaged over records.

    A record contributes at a threshold only when its prediction is
    non-empty and the alignment graph has at least one edge; every other
    record is counted in ``n_skipped_empty``. Records without a prediction
    entry count as empty predictions.
    """
    config = config or EvalConfig()
    if not records:
        raise EvaluationError("empty corpus")
    by_id = {r.repo_id: r for r in records}
    unknown = sorted(set(predictions) - set(by_id))
    if unknown:
        raise EvaluationError(f"predictions reference repo_ids absent from the corpus: {', '.join(unknown)}")
    if embedder is None:
        embedder = make_embedder(config.embedder)

    ordered = sorted(by_id)

    def work(repo_id: str) -> _RecordOutcome:
        gen = predictions.get(repo_id, FeatureList())
        return _evaluate_one(gen, by_id[repo_id].gold(config.gold), config, embedder)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(work, ordered))
    else:
        outcomes = [work(rid) for rid in ordered]

    results = []
    for t_idx, threshold in enumerate(config.thresholds):
        scored = [o.by_threshold[t_idx] for o in outcomes if o.by_threshold[t_idx] is not None]
        schemes: dict[Scheme, SchemeScores | None] = {}
        pairs: dict[Scheme, PairScore | None] = {}
        n_pairs: dict[Scheme, int] = {}
        for scheme in config.schemes:
            if scored:
                per = [s[0][scheme] for s in scored]
                schemes[scheme] = SchemeScores(
                    scheme,
                    _mean([x.precision for x in per]),
                    _mean([x.recall for x in per]),
                    _mean([x.f1 for x in per]),
                    threshold,
                )
            else:
                schemes[scheme] = None
            pooled = [ps for s in scored for ps in s[1][scheme]]
            pairs[scheme] = aggregate_pair_metrics(pooled)
            n_pairs[scheme] = len(pooled)
        results.append(
            ThresholdResult(float(threshold), len(scored), len(ordered) - len(scored), schemes, pairs, n_pairs)
        )
    return MetricReport(config.model_name, config.echo(), len(ordered), tuple(results))


def run_evaluation(
    corpus_path: str | os.PathLike,
    predictions_path: str | os.PathLike,
    config: EvalConfig | None = None,
    embedder=None,
) -> MetricReport:
    return evaluate_records(load_corpus(corpus_path), load_predictions(predictions_path), config, embedder)


# -- rendering ----------------------------------------------------------------

TABLE_COLUMNS = {
    Scheme.ONE_TO_ONE: (("F1#", "f1"), ("P#", "precision"), ("R#", "recall")),
    Scheme.MANY_TO_ONE: (("F1*", "f1"), ("P*", "precision"), ("R*", "recall")),
    # weighted recall equals many2one recall and is not repeated
    Scheme.WEIGHTED: (("F1+", "f1"), ("P+", "precision")),
}
_PAIR_METRICS = (("ROUGE-1", "rouge1"), ("ROUGE-2", "rouge2"), ("ROUGE-L", "rougeL"), ("Semantic", "semantic"))


def report_to_json(report: MetricReport) -> str:
    return json.dumps(report.to_json(), indent=2, ensure_ascii=False) + "\n"


def _schemes_of(reports: Sequence[MetricReport]) -> list[Scheme]:
    present = {Scheme(s) for r in reports for s in r.config.get("schemes", [])}
    return [s for s in ALL_SCHEMES if s in present]


def _score_rows(reports: Sequence[MetricReport]):
    schemes = _schemes_of(reports)
    header = ["Model", "Threshold"] + [name for s in schemes for name, _ in TABLE_COLUMNS[s]]
    rows = []
    for report in reports:
        for res in report.results:
            cells: list = [report.model, res.threshold]
            for s in schemes:
                sc = res.schemes.get(s)
                cells.extend(getattr(sc, attr) if sc else None for _, attr in TABLE_COLUMNS[s])
            rows.append((res, cells))
    return header, rows


def _md_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines)


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _render_markdown(reports: Sequence[MetricReport]) -> str:
    header, rows = _score_rows(reports)
    body = [
        _md_table(
            header,
            [[str(c[0]), f"{c[1]:g}"] + [_fmt(v) for v in c[2:]] for _, c in rows],
        ),
        "",
        _md_table(
            ["Model", "Threshold", "Scored", "Skipped"],
            [[str(c[0]), f"{c[1]:g}", str(res.n_records), str(res.n_skipped_empty)] for res, c in rows],
        ),
    ]
    for scheme in _schemes_of(reports):
        if scheme is Scheme.WEIGHTED:
            continue
        pair_header = ["Model", "Threshold"] + [f"{m} {x}" for m, _ in _PAIR_METRICS for x in ("P", "R", "F1")]
        pair_rows = []
        for report in reports:
            for res in report.results:
                ps = res.pairs.get(scheme)
                cells = [report.model, f"{res.threshold:g}"]
                for _, attr in _PAIR_METRICS:
                    score = getattr(ps, attr) if ps else None
                    cells += [_fmt(getattr(score, k) if score else None) for k in ("precision", "recall", "f1")]
                pair_rows.append(cells)
        body += ["", f"Matched pairs ({scheme.value})", "", _md_table(pair_header, pair_rows)]
    return "\n".join(body) + "\n"


def _render_csv(reports: Sequence[MetricReport]) -> str:
    header, rows = _score_rows(reports)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header + ["Scored", "Skipped"])
    for res, cells in rows:
        writer.writerow(
            [cells[0], repr(cells[1])] + ["" if v is None else repr(v) for v in cells[2:]]
            + [res.n_records, res.n_skipped_empty]
        )
    return buf.getvalue()


def render_report(report: MetricReport | Sequence[MetricReport], fmt: str = "markdown") -> str:
    """Render one or more reports as a markdown table, CSV or JSON.

    Markdown rounds to three decimals; CSV and JSON keep full precision.
    """
    reports = [report] if isinstance(report, MetricReport) else list(report)
    if fmt == "markdown":
        return _render_markdown(reports)
    if fmt == "csv":
        return _render_csv(reports)
    if fmt == "json":
        if len(reports) == 1:
            return report_to_json(reports[0])
        return json.dumps([r.to_json() for r in reports], indent=2, ensure_ascii=False) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
