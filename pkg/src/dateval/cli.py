"""Command-line runner: reproducible scoring, comparison and filtering.

Four subcommands cover the pipeline:

* ``score``: evaluate a candidate corpus, write a structured report and
  print the benchmark table.
* ``compare``: build Right/Safe/Wrong tier corpora and report how well
  each metric separates them.
* ``filter``: apply the quality-control rules to precomputed
  similarity inputs.
* ``tiers``: export the tier corpora themselves for inspection.

Reports are JSON with a schema version, a config echo and an embedder
fingerprint, written atomically and with no timestamps, so identical
inputs yield byte-identical files.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from concurrent.futures import ThreadPoolExecutor
import enum
import json
import os
from pathlib import Path
import sys
from typing import Mapping, Sequence

import click

from . import __version__
from .aggregation import (
    CellScores,
    MissingCellError,
    cell_name,
    per_cell_scores,
    score_caption,
    score_qa,
)
from .analysis import (
    QualityTier,
    build_tier_corpora,
    cdf_csv,
    discrimination_report,
    report_to_dict,
)
from .baselines import MetricId, bleu1_corpus, cosine_baseline
from .embedding import (
    DEFAULT_DIMENSION,
    DEFAULT_SEED,
    EmbedServiceError,
    RemoteBackend,
    TestBackend,
    fingerprint_digest,
)
from .metric import date_corpus
from .quality import (
    DEFAULT_THRESHOLD,
    FilterConfig,
    filter_corpus,
    load_filter_inputs,
    serialize_verdicts,
)
from .records import (
    Corpus,
    CorpusFormatError,
    Task,
    load_corpus,
    parse_corpus,
    serialize_corpus,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMBEDDER = 3

_EMBEDDING_METRICS = {MetricId.DATE.value, MetricId.COSINE.value}


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; echoed verbatim into the report."""

    command: str
    task: Task | None = None
    corpus_path: Path | None = None
    references_path: Path | None = None
    candidates_path: Path | None = None
    inputs_path: Path | None = None
    metrics: tuple[str, ...] = (MetricId.DATE.value,)
    embedder: str = "test"
    endpoint: str | None = None
    dimension: int = DEFAULT_DIMENSION
    seed: int = DEFAULT_SEED
    matrix_scope: str = "per-subcategory"
    agg_convention: str = "cell-mean"
    threshold: float = DEFAULT_THRESHOLD
    patterns: tuple[str, ...] = ()
    safe_template: str | None = None
    jobs: int = 1
    cache_dir: Path | None = None
    out_path: Path | None = None
    out_dir: Path | None = None
    csv_path: Path | None = None
    dump_matrices: bool = False

    def echo(self) -> dict:
        """JSON-safe view of the fields that shape the output."""
        raw = asdict(self)
        echo = {}
        for key, value in raw.items():
            if value is None:
                continue
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, enum.Enum):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            echo[key] = value
        return echo


def _build_embedder(config: RunConfig):
    if config.embedder == "test":
        return TestBackend(dimension=config.dimension, seed=config.seed)
    if config.embedder == "remote":
        if not config.endpoint:
            raise CorpusFormatError(
                "remote embedder needs --endpoint or EMBED_ENDPOINT"
            )
        return RemoteBackend(config.endpoint, cache_dir=config.cache_dir)
    raise CorpusFormatError(f"unknown embedder {config.embedder!r}")


def _load_eval_corpus(config: RunConfig) -> Corpus:
    if config.corpus_path is not None:
        return load_corpus(config.corpus_path, config.task)
    if config.references_path is None or config.candidates_path is None:
        raise CorpusFormatError(
            "provide --corpus, or --references together with --candidates"
        )
    candidates: dict[str, str] = {}
    with open(config.candidates_path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(
                    f"candidates file: malformed JSON: {exc.msg}", line_number
                ) from None
            if not isinstance(obj, dict) or "id" not in obj or "candidate" not in obj:
                raise CorpusFormatError(
                    'candidates file lines need {"id", "candidate"}', line_number
                )
            if obj["id"] in candidates:
                raise CorpusFormatError(
                    f"candidates file: duplicate id {obj['id']!r}", line_number
                )
            candidates[obj["id"]] = obj["candidate"]

    merged_lines = []
    with open(config.references_path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                merged_lines.append(line)
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(
                    f"references file: malformed JSON: {exc.msg}", line_number
                ) from None
            rec_id = obj.get("id") if isinstance(obj, dict) else None
            if rec_id in candidates:
                obj["candidate"] = candidates.pop(rec_id)
            elif isinstance(obj, dict) and "candidate" not in obj:
                raise CorpusFormatError(
                    f"no candidate supplied for record {rec_id!r}", line_number
                )
            merged_lines.append(json.dumps(obj, ensure_ascii=False))
    if candidates:
        stray = sorted(candidates)[:5]
        raise CorpusFormatError(f"candidates for unknown record ids: {stray}")
    return parse_corpus(merged_lines, config.task)


def _warm_embedder(corpus: Corpus, embedder, config: RunConfig) -> None:
    """Prime per-token / per-text caches in parallel.

    Scoring itself stays single-threaded and deterministic; this pass
    only fills caches, so ``--jobs`` has no effect on the output bytes.
    """
    if config.jobs <= 1:
        return
    if not _EMBEDDING_METRICS.intersection(config.metrics):
        return
    texts = list(dict.fromkeys(
        [rec.candidate for rec in corpus] + corpus.reference_texts()
    ))
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        list(pool.map(embedder.embed_tokens, texts))
        if MetricId.COSINE.value in config.metrics:
            list(pool.map(embedder.embed_sentence, texts))


def _group_name(key) -> str:
    return key.value if isinstance(key, enum.Enum) else str(key)


def _cells_section(corpus: Corpus, scores: Mapping[str, float], config: RunConfig):
    cells = per_cell_scores(corpus, scores)
    section: dict = {
        "cells": {cell_name(k): v for k, v in cells.cells.items()},
        "cell_counts": {cell_name(k): n for k, n in cells.counts.items()},
        "missing_cells": [cell_name(k) for k in cells.missing],
        "breakdown": None,
    }
    if not cells.missing:
        if corpus.task is Task.CAPTION:
            breakdown = score_caption(cells, convention=config.agg_convention)
        else:
            breakdown = score_qa(cells)
        section["breakdown"] = asdict(breakdown)
    return cells, section


def _score_one_metric(metric: str, corpus: Corpus, embedder, config: RunConfig):
    """Returns (report section, per-sample score map, matrices to dump)."""
    matrices = {}
    if metric == MetricId.DATE.value:
        result = date_corpus(
            corpus,
            embedder,
            matrix_scope=config.matrix_scope,
            keep_matrices=config.dump_matrices,
        )
        matrices = result.matrices
        scores = {s.id: s.date for s in result.samples}
        section = {
            "dataset_score": result.dataset_score,
            "low_sample_fallback": result.low_sample_fallback,
            "samples": [
                {"id": s.id, "s_sim": s.s_sim, "s_dis": s.s_dis, "date": s.date}
                for s in result.samples
            ],
        }
    elif metric == MetricId.COSINE.value:
        result = cosine_baseline(corpus, embedder)
        scores = {s.id: s.score for s in result.samples}
        section = {
            "dataset_score": result.mean_score,
            "samples": [{"id": s.id, "score": s.score} for s in result.samples],
        }
    elif metric == MetricId.BLEU1.value:
        result = bleu1_corpus(corpus)
        scores = {s.id: s.score for s in result.samples}
        section = {
            "dataset_score": result.mean_score,
            "samples": [{"id": s.id, "score": s.score} for s in result.samples],
        }
    else:
        raise CorpusFormatError(f"unknown metric {metric!r}")
    _, cell_section = _cells_section(corpus, scores, config)
    section.update(cell_section)
    return section, scores, matrices


def _write_atomic(path: Path, payload: str) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _write_report(path: Path, body: dict) -> None:
    payload = json.dumps(body, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    _write_atomic(path, payload)


_CAPTION_HEADER = (
    "long",
    "short",
    "speech-p",
    "speech-m",
    "music-p",
    "music-m",
    "sound-p",
    "sound-m",
    "env",
    "score",
)
_QA_HEADER = ("dp", "sc", "qas", "er", "ij", "ac", "score")


def _print_table(task: Task, sections: Mapping[str, dict]) -> None:
    header = _CAPTION_HEADER if task is Task.CAPTION else _QA_HEADER
    total_key = "score_cap" if task is Task.CAPTION else "score_qa"
    name_width = max([len("metric")] + [len(m) for m in sections])
    click.echo(
        "  ".join(["metric".ljust(name_width)] + [h.rjust(8) for h in header])
    )
    for metric, section in sections.items():
        breakdown = section.get("breakdown")
        row = [metric.ljust(name_width)]
        if breakdown is None:
            missing = ", ".join(section.get("missing_cells", []))
            click.echo(f"{row[0]}  (no breakdown; empty cells: {missing})")
            continue
        if task is Task.CAPTION:
            values = [
                breakdown["s_long"],
                breakdown["s_short"],
                breakdown["s_speech_pure"],
                breakdown["s_speech_mixed"],
                breakdown["s_music_pure"],
                breakdown["s_music_mixed"],
                breakdown["s_sound_pure"],
                breakdown["s_sound_mixed"],
                breakdown["s_env"],
                breakdown[total_key],
            ]
        else:
            values = [
                breakdown["s_dp"],
                breakdown["s_sc"],
                breakdown["s_qas"],
                breakdown["s_er"],
                breakdown["s_ij"],
                breakdown["s_ac"],
                breakdown[total_key],
            ]
        row += [f"{v:.1f}".rjust(8) for v in values]
        click.echo("  ".join(row))


def run_score(config: RunConfig) -> dict:
    """Score a corpus with the configured metrics and write the report."""
    corpus = _load_eval_corpus(config)
    embedder = None
    if _EMBEDDING_METRICS.intersection(config.metrics):
        embedder = _build_embedder(config)
        _warm_embedder(corpus, embedder, config)

    sections = {}
    dumped = []
    for metric in config.metrics:
        section, _, matrices = _score_one_metric(metric, corpus, embedder, config)
        sections[metric] = section
        if config.dump_matrices and matrices and config.out_path is not None:
            for key, matrix in matrices.items():
                prefix = config.out_path.with_name(
                    f"{config.out_path.stem}.matrix.{_group_name(key)}"
                )
                matrix.save(prefix)
                dumped.append(str(prefix))

    body = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "dateval", "version": __version__},
        "config": config.echo(),
        "task": config.task.value,
        "embedder": embedder.fingerprint() if embedder is not None else None,
        "embedder_digest": (
            fingerprint_digest(embedder.fingerprint()) if embedder is not None else None
        ),
        "record_count": len(corpus),
        "metrics": sections,
    }
    if dumped:
        body["matrix_files"] = sorted(dumped)
    if config.out_path is not None:
        _write_report(config.out_path, body)
    _print_table(config.task, sections)
    return body


def run_compare(config: RunConfig) -> dict:
    """Score tier corpora per metric and report the separations."""
    base = _load_eval_corpus(config)
    embedder = None
    if _EMBEDDING_METRICS.intersection(config.metrics):
        embedder = _build_embedder(config)

    tiers = build_tier_corpora(base, safe_template=config.safe_template,
                               seed=config.seed)
    tier_scores: dict[str, dict[QualityTier, list[float]]] = {}
    for metric in config.metrics:
        per_tier = {}
        for tier, corpus in tiers.items():
            if embedder is not None:
                _warm_embedder(corpus, embedder, config)
            _, scores, _ = _score_one_metric(metric, corpus, embedder, config)
            per_tier[tier] = [scores[rec.id] for rec in corpus]
        tier_scores[metric] = per_tier

    report = discrimination_report(tier_scores)
    body = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "dateval", "version": __version__},
        "config": config.echo(),
        "task": config.task.value,
        "embedder": embedder.fingerprint() if embedder is not None else None,
        "record_count": len(base),
        "discrimination": report_to_dict(report),
    }
    if config.out_path is not None:
        _write_report(config.out_path, body)
    if config.csv_path is not None:
        _write_atomic(config.csv_path, cdf_csv(report))
    for m in report.metrics:
        click.echo(
            f"{m.metric}: medians right={m.medians['Right']:.1f} "
            f"safe={m.medians['Safe']:.1f} wrong={m.medians['Wrong']:.1f}  "
            f"spans right-wrong={m.right_wrong_span:.1f} "
            f"right-safe={m.right_safe_span:.1f}  "
            f"ordered={m.ordered_right_above_safe and m.ordered_safe_above_wrong}"
        )
    return body


def run_filter(config: RunConfig) -> dict:
    """Apply quality-control rules; write verdict lines, print counts."""
    items = load_filter_inputs(config.inputs_path)
    filter_config = FilterConfig(
        threshold=config.threshold, hallucination_patterns=config.patterns
    )
    result = filter_corpus(items, filter_config)
    if config.out_path is not None:
        _write_atomic(config.out_path, serialize_verdicts(result.verdicts))
    click.echo(
        f"kept {len(result.kept_ids)} of {len(items)} "
        f"(threshold {filter_config.threshold:g})"
    )
    for rule, count in sorted(result.rule_counts.items()):
        click.echo(f"  failed {rule}: {count}")
    return {
        "kept": list(result.kept_ids),
        "rule_counts": dict(result.rule_counts),
        "total": len(items),
    }


def run_tiers(config: RunConfig) -> None:
    """Write the Right/Safe/Wrong corpora next to each other."""
    base = _load_eval_corpus(config)
    tiers = build_tier_corpora(base, safe_template=config.safe_template,
                               seed=config.seed)
    out_dir = config.out_dir or Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for tier, corpus in tiers.items():
        path = out_dir / f"{tier.value.lower()}.jsonl"
        _write_atomic(path, serialize_corpus(corpus))
        click.echo(f"wrote {path} ({len(corpus)} records)")


def _fail(exc: BaseException, code: int) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _dispatch(runner, config: RunConfig) -> None:
    try:
        runner(config)
    except EmbedServiceError as exc:
        _fail(exc, EXIT_EMBEDDER)
    except (CorpusFormatError, MissingCellError) as exc:
        _fail(exc, EXIT_INPUT)
    except (ValueError, OSError) as exc:
        _fail(exc, EXIT_INPUT)


def _parse_metrics(value: str) -> tuple[str, ...]:
    metrics = tuple(m.strip() for m in value.split(",") if m.strip())
    if not metrics:
        raise click.BadParameter("no metrics given")
    known = {m.value for m in MetricId}
    unknown = [m for m in metrics if m not in known]
    if unknown:
        raise click.BadParameter(
            f"unknown metrics {unknown}; choose from {sorted(known)}"
        )
    return metrics


_task_option = click.option(
    "--task", type=click.Choice([t.value for t in Task]), required=True,
    help="Corpus task: caption or qa.",
)
_corpus_options = (
    click.option("--corpus", "corpus_path", type=click.Path(path_type=Path),
                 default=None, help="Combined corpus JSONL."),
    click.option("--references", "references_path", type=click.Path(path_type=Path),
                 default=None, help="Reference corpus JSONL (candidates merged in)."),
    click.option("--candidates", "candidates_path", type=click.Path(path_type=Path),
                 default=None,
                 help='Candidate lines {"id", "candidate"} merged by id.'),
)
_embedder_options = (
    click.option("--embedder", type=click.Choice(["test", "remote"]),
                 default="test", show_default=True),
    click.option("--endpoint", envvar="EMBED_ENDPOINT", default=None,
                 help="Remote embedder base URL (or env EMBED_ENDPOINT)."),
    click.option("--dim", "dimension", type=int, default=DEFAULT_DIMENSION,
                 show_default=True, help="Test embedder dimension."),
    click.option("--cache-dir", type=click.Path(path_type=Path), default=None,
                 help="Disk cache for remote embeddings."),
)
_seed_option = click.option(
    "--seed", type=int, default=DEFAULT_SEED, show_default=True,
    help="Seed for the test embedder and tier construction.",
)
_jobs_option = click.option(
    "--jobs", type=int, default=1, show_default=True,
    help="Worker threads for cache warm-up; output is unaffected.",
)


def _add(options, command):
    for option in reversed(options):
        command = option(command)
    return command


@click.group()
@click.version_option(version=__version__, prog_name="dateval")
def main():
    """Caption and QA evaluation with discriminability-aware scoring."""


@main.command()
@_task_option
@click.option("--metric", "metrics", default=MetricId.DATE.value, show_default=True,
              help="Comma-separated list: date,cosine,bleu1.")
@_seed_option
@click.option("--matrix-scope", type=click.Choice(["per-subcategory", "global"]),
              default="per-subcategory", show_default=True)
@click.option("--agg-convention", type=click.Choice(["cell-mean", "sample-mean"]),
              default="cell-mean", show_default=True)
@click.option("--dump-matrices", is_flag=True,
              help="Write each cross-sample matrix beside the report.")
@_jobs_option
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Report JSON path.")
def score(task, metrics, seed, matrix_scope, agg_convention, dump_matrices,
          jobs, out_path, **kwargs):
    """Score a candidate corpus and print the benchmark table."""
    config = RunConfig(
        command="score",
        task=Task(task),
        metrics=_parse_metrics(metrics),
        seed=seed,
        matrix_scope=matrix_scope,
        agg_convention=agg_convention,
        dump_matrices=dump_matrices,
        jobs=jobs,
        out_path=out_path,
        **kwargs,
    )
    _dispatch(run_score, config)


score = _add(_corpus_options + _embedder_options, score)


@main.command()
@_task_option
@click.option("--metric", "metrics", default="date,cosine", show_default=True,
              help="Comma-separated list: date,cosine,bleu1.")
@_seed_option
@click.option("--matrix-scope", type=click.Choice(["per-subcategory", "global"]),
              default="per-subcategory", show_default=True)
@click.option("--safe-template", default=None,
              help="Generic caption for the Safe tier (default by domain).")
@_jobs_option
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Report JSON path.")
@click.option("--csv-out", "csv_path", type=click.Path(path_type=Path), default=None,
              help="CDF plot-data CSV path.")
def compare(task, metrics, seed, matrix_scope, safe_template, jobs, out_path,
            csv_path, **kwargs):
    """Compare metric discrimination on Right/Safe/Wrong tiers."""
    config = RunConfig(
        command="compare",
        task=Task(task),
        metrics=_parse_metrics(metrics),
        seed=seed,
        matrix_scope=matrix_scope,
        safe_template=safe_template,
        jobs=jobs,
        out_path=out_path,
        csv_path=csv_path,
        **kwargs,
    )
    _dispatch(run_compare, config)


compare = _add(_corpus_options + _embedder_options, compare)


@main.command("filter")
@click.option("--inputs", "inputs_path", type=click.Path(path_type=Path),
              required=True, help="Filter-input JSONL.")
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD,
              show_default=True, help="Similarity margin in points.")
@click.option("--pattern", "patterns", multiple=True,
              help="Hallucination phrase (repeatable, substring match).")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Verdict JSONL path.")
def filter_command(inputs_path, threshold, patterns, out_path):
    """Apply the quality-control filters to similarity inputs."""
    config = RunConfig(
        command="filter",
        inputs_path=inputs_path,
        threshold=threshold,
        patterns=tuple(patterns),
        out_path=out_path,
    )
    _dispatch(run_filter, config)


@main.command()
@_task_option
@_seed_option
@click.option("--safe-template", default=None,
              help="Generic caption for the Safe tier (default by domain).")
@click.option("--out-dir", type=click.Path(path_type=Path), default=None,
              help="Directory for right/safe/wrong corpora.")
def tiers(task, seed, safe_template, out_dir, **kwargs):
    """Export Right/Safe/Wrong tier corpora built from a base corpus."""
    config = RunConfig(
        command="tiers",
        task=Task(task),
        seed=seed,
        safe_template=safe_template,
        out_dir=out_dir,
        **kwargs,
    )
    _dispatch(run_tiers, config)


tiers = _add(_corpus_options, tiers)


if __name__ == "__main__":
    main()
