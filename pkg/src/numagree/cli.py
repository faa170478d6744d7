"""Command line interface.

Subcommands: score, sweep, topk, ingest, lexicon, dump-validate.
Exit codes: 0 success, 1 scoring-domain error, 2 configuration/IO error.
Values from a --config JSON file override the corresponding flags, and
$NUMAGREE_OUTPUT_ROOT roots relative output directories.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from . import backend as backend_mod
from . import lexicon as lexicon_mod
from . import report as report_mod
from . import templates as templates_mod
from .errors import ConfigError, DataFormatError, NumagreeError
from .report import RunConfig

log = logging.getLogger("numagree")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CONFIG = 2


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--templates", nargs="+", metavar="FILE",
                     help="canonical template file(s)")
    sub.add_argument("--lemmas", nargs="+", metavar="FILE",
                     help="lemma list file(s); default: shipped merged list")
    sub.add_argument("--reject-list", metavar="FILE", default=_SHIPPED,
                     help="lemma reject list; 'none' disables (default: shipped)")
    sub.add_argument("--exceptions", metavar="FILE", default=_SHIPPED,
                     help="inflection exceptions file; 'none' disables (default: shipped)")
    sub.add_argument("--tse-lemmas", metavar="FILE",
                     help="classic-TSE sidecar (template id -> lemmas)")
    sub.add_argument("--backend", choices=("synthetic", "dump", "http"),
                     help="probability backend kind")
    sub.add_argument("--backend-path", metavar="FILE",
                     help="synthetic spec file or dump file")
    sub.add_argument("--backend-url", metavar="URL", help="http backend base URL")
    sub.add_argument("--model-id", metavar="ID", help="model id for the http backend")
    sub.add_argument("--direction", choices=backend_mod.DIRECTIONS,
                     help="scoring direction for the http backend")
    sub.add_argument("--manifest", metavar="FILE",
                     help="vocabulary manifest for eligibility filtering")
    sub.add_argument("--no-vocab-filter", action="store_true",
                     help="skip vocabulary-eligibility filtering of the lexicon")
    sub.add_argument("--capitalize-first", action="store_true",
                     help="uppercase the first character of each context")
    sub.add_argument("--final-period", action="store_true",
                     help="append a sentence-final period where missing")
    sub.add_argument("--top-requires-both", action="store_true",
                     help="top-p EW requires both inflections inside the nucleus")
    sub.add_argument("--top-grid", type=float, nargs="+", metavar="P",
                     help="top-p cutoffs in percent")
    sub.add_argument("--bottom-grid", type=float, nargs="+", metavar="P",
                     help="bottom-p cutoffs in percent")
    sub.add_argument("--output-dir", "-o", metavar="DIR", default="numagree-out",
                     help="output directory (relative paths live under "
                          "$NUMAGREE_OUTPUT_ROOT when set)")
    sub.add_argument("--parallelism", "-j", type=int, default=1,
                     help="worker threads for backend queries")
    sub.add_argument("--seed", type=int, default=0,
                     help="recorded in outputs; scoring itself is sampling-free")
    sub.add_argument("--no-figures", action="store_true",
                     help="skip rendering PNG figures")
    sub.add_argument("--config", metavar="FILE",
                     help="JSON run config; its values override flags")


_SHIPPED = "@shipped"


def _shipped_or(value: str | None, default_name: str) -> str | None:
    if value == _SHIPPED:
        return str(lexicon_mod.data_path(default_name))
    if value in (None, "none"):
        return None
    return value


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    backend: dict = {"kind": args.backend}
    if args.backend in ("synthetic", "dump"):
        backend["path"] = args.backend_path
    if args.backend == "http":
        backend["url"] = args.backend_url
        backend["model_id"] = args.model_id
        backend["direction"] = args.direction
    if args.manifest:
        backend["manifest"] = args.manifest

    config = RunConfig(
        templates=list(args.templates or []),
        backend=backend,
        lemmas=list(args.lemmas or []),
        reject_list=_shipped_or(args.reject_list, lexicon_mod.DEFAULT_REJECT_LIST),
        exceptions=_shipped_or(args.exceptions, lexicon_mod.DEFAULT_EXCEPTIONS),
        tse_lemmas=args.tse_lemmas,
        filter_by_vocabulary=not args.no_vocab_filter,
        capitalize_first=args.capitalize_first,
        require_final_period=args.final_period,
        top_requires_both=args.top_requires_both,
        output_dir=args.output_dir,
        parallelism=args.parallelism,
        seed=args.seed,
        figures=not args.no_figures,
    )
    if args.top_grid:
        config.top_grid = list(args.top_grid)
    if args.bottom_grid:
        config.bottom_grid = list(args.bottom_grid)

    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            overrides = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON in {path}: {exc}")
        if not isinstance(overrides, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        known = set(config.as_dict())
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
        for key, value in overrides.items():
            setattr(config, key, value)
    return config


def _cmd_score(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = report_mod.run_score(config)
    for row in report.rows:
        log.info(
            "%s: mw=%s ew=%s tse=%s (n=%d, excluded=%d)",
            row.construction,
            row.mw_mean,
            row.ew_mean,
            row.tse_mean,
            row.n_templates,
            row.n_excluded,
        )
    print(f"wrote score tables to {config.output_dir}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    rows = report_mod.run_sweep(config)
    print(f"wrote {len(rows)} curve rows to {config.output_dir}")
    return EXIT_OK


def _cmd_topk(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    config.topk = args.k
    rows = report_mod.run_topk(config, args.k)
    print(f"wrote top-{args.k} listings for {len(rows)} templates to {config.output_dir}")
    return EXIT_OK


def _cmd_ingest(args: argparse.Namespace) -> int:
    overrides = None
    exceptions = _shipped_or(args.exceptions, lexicon_mod.DEFAULT_EXCEPTIONS)
    if exceptions:
        overrides = lexicon_mod.load_exceptions(exceptions)
    lexicon = None
    if args.lemmas:
        lexica = [lexicon_mod.load_lemma_list(p, overrides=overrides) for p in args.lemmas]
        lexicon = lexicon_mod.merge_lexicons(lexica)
    policy = templates_mod.NormalizationPolicy(
        capitalize_first=args.capitalize_first,
        require_final_period=args.final_period,
    )
    result = templates_mod.load_minimal_pairs(
        args.pairs,
        dataset=args.dataset,
        construction=args.construction,
        construction_from_uid=args.construction_from_uid,
        paradigms=args.paradigms,
        lexicon=lexicon,
        overrides=overrides,
        policy=policy,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    templates_mod.write_template_file(result.instances, out)
    sidecar = out.with_suffix(".tse_lemmas.json")
    templates_mod.write_tse_lemmas(result.tse_lemmas, sidecar)
    stats = result.stats
    print(
        f"ingested {stats.n_loaded} templates -> {out} "
        f"(duplicates dropped: {stats.n_duplicates_dropped}, "
        f"not-one-token-diff skipped: {stats.n_skipped_not_one_diff}, "
        f"number unresolved: {stats.n_skipped_number_unresolved}, "
        f"paradigm filtered: {stats.n_skipped_paradigm}); "
        f"lemma sidecar -> {sidecar}"
    )
    return EXIT_OK


def _cmd_lexicon(args: argparse.Namespace) -> int:
    overrides = None
    exceptions = _shipped_or(args.exceptions, lexicon_mod.DEFAULT_EXCEPTIONS)
    if exceptions:
        overrides = lexicon_mod.load_exceptions(exceptions)
    paths = args.lemmas or [str(lexicon_mod.data_path(lexicon_mod.DEFAULT_LEMMAS))]
    lexica = [lexicon_mod.load_lemma_list(p, overrides=overrides) for p in paths]
    lex = lexicon_mod.merge_lexicons(lexica)
    print(f"loaded {len(lex)} lemmas from {len(paths)} file(s)")
    reject = _shipped_or(args.reject_list, lexicon_mod.DEFAULT_REJECT_LIST)
    if reject:
        before = len(lex)
        lex = lex.without(lexicon_mod.load_reject_list(reject))
        print(f"reject list removed {before - len(lex)} -> {len(lex)} lemmas")
    if args.manifest:
        vocab = backend_mod.load_vocab_manifest(args.manifest)
        lex, stats = lexicon_mod.filter_by_vocabulary(lex, vocab.__contains__)
        print(f"vocabulary filter kept {stats.n_kept} of {stats.n_input} pairs")
        if stats.empty:
            print("warning: no pair survived the vocabulary filter")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# lemma\tsingular\tplural\tsources\n")
            for pair in lex:
                sources = ",".join(sorted(lex.source_tags.get(pair.lemma, ())))
                fh.write(f"{pair.lemma}\t{pair.singular_form}\t{pair.plural_form}\t{sources}\n")
        print(f"wrote inflection table to {args.out}")
    return EXIT_OK


def _cmd_dump_validate(args: argparse.Namespace) -> int:
    header = backend_mod.read_dump_header(args.dump)
    n = 0
    for _ in backend_mod.read_dump(
        args.dump,
        expected_manifest_hash=backend_mod.manifest_hash(args.manifest)
        if args.manifest
        else None,
    ):
        n += 1
    print(
        f"OK: {n} distributions, model_id={header.model_id!r}, "
        f"direction={header.direction}, format_version={header.format_version}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="numagree",
        description="Subject-verb number agreement evaluation for language models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="TSE/EW/MW tables per construction")
    _add_run_flags(p_score)
    p_score.set_defaults(func=_cmd_score)

    p_sweep = sub.add_parser("sweep", help="score curves across percentile cutoffs")
    _add_run_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_topk = sub.add_parser("topk", help="most probable candidate tokens per template")
    _add_run_flags(p_topk)
    p_topk.add_argument("-k", type=int, default=10, help="listing length (default 10)")
    p_topk.set_defaults(func=_cmd_topk)

    p_ingest = sub.add_parser(
        "ingest", help="convert raw good/bad sentence pairs to the canonical template file"
    )
    p_ingest.add_argument("pairs", help="JSONL file of {sentence_good, sentence_bad, ...}")
    p_ingest.add_argument("--out", required=True, help="canonical template file to write")
    p_ingest.add_argument("--dataset", choices=templates_mod.DATASETS,
                          default=templates_mod.DATASET_BLIMP)
    p_ingest.add_argument("--construction", default="BLiMP",
                          help="construction label for records without one")
    p_ingest.add_argument("--construction-from-uid", action="store_true",
                          help="use the BLiMP paradigm UID as the construction label")
    p_ingest.add_argument("--paradigms", nargs="+", metavar="UID",
                          help="keep only these BLiMP paradigm UIDs")
    p_ingest.add_argument("--lemmas", nargs="+", metavar="FILE",
                          help="lexicon used for number inference")
    p_ingest.add_argument("--exceptions", metavar="FILE", default=_SHIPPED)
    p_ingest.add_argument("--capitalize-first", action="store_true")
    p_ingest.add_argument("--final-period", action="store_true")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_lex = sub.add_parser("lexicon", help="build/inspect the verb lexicon")
    p_lex.add_argument("--lemmas", nargs="+", metavar="FILE",
                       help="lemma list file(s); default: shipped merged list")
    p_lex.add_argument("--reject-list", metavar="FILE", default=_SHIPPED)
    p_lex.add_argument("--exceptions", metavar="FILE", default=_SHIPPED)
    p_lex.add_argument("--manifest", metavar="FILE",
                       help="vocabulary manifest to filter against")
    p_lex.add_argument("--out", metavar="FILE", help="write the inflection table here")
    p_lex.set_defaults(func=_cmd_lexicon)

    p_dv = sub.add_parser("dump-validate", help="validate a distribution dump file")
    p_dv.add_argument("dump", help="dump file to validate")
    p_dv.add_argument("--manifest", metavar="FILE",
                      help="vocabulary manifest the dump must match")
    p_dv.set_defaults(func=_cmd_dump_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumagreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
