"""Run orchestration: configuration, scoring pipelines, and output files.

Every run writes, under its output directory, the exact configuration used
(config.json), a delimited text table and a JSONL record stream per result
table, and (unless disabled) rendered figures. All text outputs embed the
config hash and format version and are byte-identical across repeated runs
on the same inputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from . import backend as backend_mod
from . import lexicon as lexicon_mod
from . import metrics as metrics_mod
from . import truncation as truncation_mod
from .backend import Backend, DumpBackend, HttpBackend, SyntheticBackend, TemplateDistribution
from .errors import BackendError, ConfigError, NumagreeError
from .lexicon import Lexicon
from .metrics import ScoreReport, TemplateScore
from .templates import (
    NormalizationPolicy,
    TemplateInstance,
    load_template_file,
    load_tse_lemmas,
    normalize,
)
from .truncation import CurveRow, PercentileCutoff

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
OUTPUT_ROOT_ENV = "NUMAGREE_OUTPUT_ROOT"

_BACKEND_KINDS = ("synthetic", "dump", "http")


@dataclass
class RunConfig:
    """Everything a run needs; serialized verbatim into every output."""

    templates: list[str]
    backend: dict
    lemmas: list[str] = field(default_factory=list)
    reject_list: str | None = None
    exceptions: str | None = None
    tse_lemmas: str | None = None
    filter_by_vocabulary: bool = True
    capitalize_first: bool = False
    require_final_period: bool = False
    top_grid: list[float] = field(default_factory=lambda: list(truncation_mod.DEFAULT_TOP_GRID))
    bottom_grid: list[float] = field(
        default_factory=lambda: list(truncation_mod.DEFAULT_BOTTOM_GRID)
    )
    top_requires_both: bool = False
    output_dir: str = "numagree-out"
    parallelism: int = 1
    seed: int = 0
    figures: bool = True
    topk: int = 10

    def as_dict(self) -> dict:
        return {
            "templates": list(self.templates),
            "backend": dict(self.backend),
            "lemmas": list(self.lemmas),
            "reject_list": self.reject_list,
            "exceptions": self.exceptions,
            "tse_lemmas": self.tse_lemmas,
            "filter_by_vocabulary": self.filter_by_vocabulary,
            "capitalize_first": self.capitalize_first,
            "require_final_period": self.require_final_period,
            "top_grid": list(self.top_grid),
            "bottom_grid": list(self.bottom_grid),
            "top_requires_both": self.top_requires_both,
            "output_dir": self.output_dir,
            "parallelism": self.parallelism,
            "seed": self.seed,
            "figures": self.figures,
            "topk": self.topk,
        }

    def config_hash(self) -> str:
        canon = json.dumps(self.as_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _require_file(path: str | None, what: str) -> str | None:
    if path is None:
        return None
    resolved = Path(path).expanduser().resolve()
    if not resolved.is_file():
        raise ConfigError(f"{what} not found: {resolved}")
    return str(resolved)


def resolve_config(config: RunConfig) -> RunConfig:
    """Resolve and validate every input path; compute the output directory.

    Relative output directories are rooted at $NUMAGREE_OUTPUT_ROOT when it
    is set, otherwise at the current working directory.
    """
    if not config.templates:
        raise ConfigError("no template file given")
    if not isinstance(config.backend, dict) or config.backend.get("kind") not in _BACKEND_KINDS:
        raise ConfigError(f"backend kind must be one of {_BACKEND_KINDS}")
    config.templates = [_require_file(p, "template file") for p in config.templates]
    if not config.lemmas:
        config.lemmas = [str(lexicon_mod.data_path(lexicon_mod.DEFAULT_LEMMAS))]
    config.lemmas = [_require_file(p, "lemma file") for p in config.lemmas]
    config.reject_list = _require_file(config.reject_list, "reject list")
    config.exceptions = _require_file(config.exceptions, "exceptions file")
    config.tse_lemmas = _require_file(config.tse_lemmas, "TSE lemma sidecar")
    be = dict(config.backend)
    if be["kind"] in ("synthetic", "dump"):
        be["path"] = _require_file(be.get("path"), f"{be['kind']} backend file")
    if be.get("manifest"):
        be["manifest"] = _require_file(be["manifest"], "vocabulary manifest")
    config.backend = be
    if config.parallelism < 1:
        raise ConfigError(f"parallelism must be >= 1, got {config.parallelism}")
    for p in list(config.top_grid) + list(config.bottom_grid):
        if not 0.0 < p <= 100.0:
            raise ConfigError(f"cutoff percent {p!r} outside (0, 100]")

    out = Path(config.output_dir).expanduser()
    if not out.is_absolute():
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root:
            out = Path(root).expanduser() / out
    config.output_dir = str(out.resolve())
    return config


def make_backend(config: RunConfig) -> Backend:
    be = config.backend
    kind = be["kind"]
    if kind == "synthetic":
        return SyntheticBackend.from_spec_file(be["path"])
    if kind == "dump":
        return DumpBackend.open(be["path"], manifest_path=be.get("manifest"))
    if kind == "http":
        for key in ("url", "model_id", "direction"):
            if not be.get(key):
                raise ConfigError(f"http backend needs {key!r}")
        return HttpBackend(
            be["url"],
            model_id=be["model_id"],
            direction=be["direction"],
            manifest_path=be.get("manifest"),
        )
    raise ConfigError(f"unknown backend kind {kind!r}")


@dataclass
class RunContext:
    """Loaded inputs shared by the score/sweep/topk pipelines."""

    config: RunConfig
    lexicon: Lexicon
    templates: list[TemplateInstance]
    backend: Backend
    tse_pairs: dict[str, list]
    candidates: list[str]
    vocab_filter_stats: lexicon_mod.VocabFilterStats | None = None


def prepare(config: RunConfig) -> RunContext:
    config = resolve_config(config)

    overrides = (
        lexicon_mod.load_exceptions(config.exceptions) if config.exceptions else None
    )
    lexica = [
        lexicon_mod.load_lemma_list(path, overrides=overrides) for path in config.lemmas
    ]
    lex = lexicon_mod.merge_lexicons(lexica)
    if config.reject_list:
        lex = lex.without(lexicon_mod.load_reject_list(config.reject_list))

    backend = make_backend(config)

    stats = None
    vocab = backend.vocabulary()
    if config.filter_by_vocabulary and vocab is not None:
        lex, stats = lexicon_mod.filter_by_vocabulary(lex, vocab.__contains__)
        log.info(
            "vocabulary filter: kept %d of %d pairs", stats.n_kept, stats.n_input
        )

    policy = NormalizationPolicy(
        capitalize_first=config.capitalize_first,
        require_final_period=config.require_final_period,
    )
    instances: list[TemplateInstance] = []
    for path in config.templates:
        loaded = load_template_file(path)
        instances.extend(loaded.instances)
    if policy.capitalize_first or policy.require_final_period:
        instances = [normalize(t, policy) for t in instances]
    if not instances:
        raise NumagreeError("no templates to score (empty template collection)")

    tse_pairs: dict[str, list] = {}
    if config.tse_lemmas:
        sidecar = load_tse_lemmas(config.tse_lemmas)
        for tid, lemmas in sidecar.items():
            tse_pairs[tid] = [lexicon_mod.inflect(lemma, overrides) for lemma in lemmas]

    candidates = list(dict.fromkeys(lex.forms()))
    return RunContext(
        config=config,
        lexicon=lex,
        templates=instances,
        backend=backend,
        tse_pairs=tse_pairs,
        candidates=candidates,
        vocab_filter_stats=stats,
    )


def _map_templates(ctx: RunContext, one, collected: list) -> None:
    """Apply `one` to every template in file order, appending into
    `collected` as results arrive so a backend failure leaves the completed
    prefix behind for partial-result preservation."""
    if ctx.config.parallelism == 1:
        for template in ctx.templates:
            collected.append(one(template))
        return
    with ThreadPoolExecutor(max_workers=ctx.config.parallelism) as pool:
        for result in pool.map(one, ctx.templates):
            collected.append(result)


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------

def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_tsv(
    path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]], config_hash: str
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# format_version={FORMAT_VERSION}\n")
        fh.write(f"# config_hash={config_hash}\n")
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")


def _write_jsonl(path: Path, records: Iterable[dict], config_hash: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            json.dumps(
                {"config_hash": config_hash, "format_version": FORMAT_VERSION},
                sort_keys=True,
                separators=(",", ":"),
            )
            + "\n"
        )
        for record in records:
            fh.write(
                json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
                + "\n"
            )


def _write_config(ctx: RunContext, outdir: Path) -> str:
    config_hash = ctx.config.config_hash()
    payload = {
        "config": ctx.config.as_dict(),
        "config_hash": config_hash,
        "format_version": FORMAT_VERSION,
    }
    with open(outdir / "config.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    return config_hash


def _template_score_rows(
    ctx: RunContext, scores: Sequence[TemplateScore]
) -> tuple[list[Sequence[Any]], list[dict]]:
    by_id = {t.id: t for t in ctx.templates}
    tsv_rows = []
    json_rows = []
    for s in scores:
        t = by_id[s.template_id]
        tsv_rows.append(
            (t.id, t.construction, t.number, s.tse, s.ew, s.mw, s.n_lemmas_used, s.excluded_reason)
        )
        json_rows.append(
            {
                "template_id": t.id,
                "construction": t.construction,
                "number": t.number,
                "tse": s.tse,
                "ew": s.ew,
                "mw": s.mw,
                "n_lemmas_used": s.n_lemmas_used,
                "excluded_reason": s.excluded_reason,
            }
        )
    return tsv_rows, json_rows


def _write_partial(ctx: RunContext, scores: Sequence[TemplateScore], outdir: Path) -> None:
    partial = outdir / ".partial"
    partial.mkdir(parents=True, exist_ok=True)
    config_hash = ctx.config.config_hash()
    _, json_rows = _template_score_rows(ctx, scores)
    _write_jsonl(partial / "template_scores.jsonl", json_rows, config_hash)
    log.error("backend failure: %d partial scores preserved under %s", len(scores), partial)


def run_score(config: RunConfig) -> ScoreReport:
    """Score every template and write the per-template and per-construction
    tables (plus a bar-chart figure unless figures are disabled)."""
    ctx = prepare(config)
    outdir = Path(ctx.config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    config_hash = _write_config(ctx, outdir)

    def score_one(template: TemplateInstance) -> TemplateScore:
        dist = ctx.backend.query(template, ctx.candidates)
        return metrics_mod.score_template(
            dist, ctx.lexicon, template.number, tse_pairs=ctx.tse_pairs.get(template.id)
        )

    scores: list[TemplateScore] = []
    try:
        _map_templates(ctx, score_one, scores)
    except BackendError:
        _write_partial(ctx, scores, outdir)
        raise

    grouping = {t.id: t.construction for t in ctx.templates}
    report = metrics_mod.aggregate(scores, grouping)

    tsv_rows, json_rows = _template_score_rows(ctx, scores)
    _write_tsv(
        outdir / "template_scores.tsv",
        ("template_id", "construction", "number", "tse", "ew", "mw", "n_lemmas_used", "excluded_reason"),
        tsv_rows,
        config_hash,
    )
    _write_jsonl(outdir / "template_scores.jsonl", json_rows, config_hash)

    table_rows = [
        (r.construction, r.mw_mean, r.ew_mean, r.tse_mean, r.n_templates, r.n_excluded)
        for r in report.rows
    ]
    _write_tsv(
        outdir / "construction_table.tsv",
        ("construction", "mw", "ew", "tse", "n_templates", "n_excluded"),
        table_rows,
        config_hash,
    )
    _write_jsonl(
        outdir / "construction_table.jsonl",
        [
            {
                "construction": r.construction,
                "mw": r.mw_mean,
                "ew": r.ew_mean,
                "tse": r.tse_mean,
                "n_templates": r.n_templates,
                "n_excluded": r.n_excluded,
                "excluded_by_reason": dict(r.excluded_by_reason),
                "n_mw": r.n_mw,
                "n_ew": r.n_ew,
                "n_tse": r.n_tse,
            }
            for r in report.rows
        ],
        config_hash,
    )

    if ctx.config.figures:
        from . import plots

        plots.render_score_report(report, outdir / "figures")
    return report


def run_sweep(config: RunConfig) -> list[CurveRow]:
    """Score every template across the cutoff grids and write curve tables
    (plus curve/diagnostic figures unless figures are disabled)."""
    ctx = prepare(config)
    outdir = Path(ctx.config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    config_hash = _write_config(ctx, outdir)

    dists: list[TemplateDistribution] = []
    try:
        _map_templates(ctx, lambda t: ctx.backend.query(t, ctx.candidates), dists)
    except BackendError:
        _write_partial(ctx, [], outdir)
        raise

    cutoffs = [PercentileCutoff(truncation_mod.TOP, p) for p in ctx.config.top_grid]
    cutoffs += [PercentileCutoff(truncation_mod.BOTTOM, p) for p in ctx.config.bottom_grid]
    rows = truncation_mod.sweep(
        list(zip(ctx.templates, dists)),
        ctx.lexicon,
        cutoffs,
        top_requires_both=ctx.config.top_requires_both,
    )

    _write_tsv(
        outdir / "curves.tsv",
        ("construction", "kind", "p", "metric", "value", "mass_counted", "invalid_proportion"),
        [
            (r.construction, r.kind, r.p, r.metric, r.value, r.mass_counted, r.invalid_proportion)
            for r in rows
        ],
        config_hash,
    )
    _write_jsonl(
        outdir / "curves.jsonl",
        [
            {
                "construction": r.construction,
                "kind": r.kind,
                "p": r.p,
                "metric": r.metric,
                "value": r.value,
                "mass_counted": r.mass_counted,
                "invalid_proportion": r.invalid_proportion,
                "n_templates": r.n_templates,
                "n_scored": r.n_scored,
            }
            for r in rows
        ],
        config_hash,
    )

    if ctx.config.figures:
        from . import plots

        plots.render_curves(rows, outdir / "figures")
    return rows


@dataclass(frozen=True)
class QualitativeRow:
    """Top-k most probable candidate tokens for one template."""

    template_id: str
    top_k: tuple[tuple[str, float], ...]


def run_topk(config: RunConfig, k: int | None = None) -> list[QualitativeRow]:
    """Write the per-template top-k most probable token listings."""
    ctx = prepare(config)
    k = ctx.config.topk if k is None else k
    outdir = Path(ctx.config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    config_hash = _write_config(ctx, outdir)

    rows: list[QualitativeRow] = []
    for template in ctx.templates:
        entries = ctx.backend.topk(template, k)
        rows.append(QualitativeRow(template.id, tuple(entries)))

    tsv_rows = []
    json_rows = []
    for row in rows:
        for position, (form, prob) in enumerate(row.top_k, start=1):
            tsv_rows.append((row.template_id, position, form, prob))
        json_rows.append(
            {
                "template_id": row.template_id,
                "top_k": [[form, prob] for form, prob in row.top_k],
            }
        )
    _write_tsv(
        outdir / "topk.tsv", ("template_id", "position", "form", "prob"), tsv_rows, config_hash
    )
    _write_jsonl(outdir / "topk.jsonl", json_rows, config_hash)
    return rows
