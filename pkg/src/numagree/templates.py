"""Evaluation templates: a sentence context split around a verb slot.

Two loaders feed the toolkit:

* `load_template_file` reads the canonical normalized template file (one JSON
  record per line, fields id/dataset/construction/prefix/suffix/number) that
  `ingest` produces and docs/formats.md pins down byte-exactly.
* `load_minimal_pairs` converts raw good/bad sentence-pair records (BLiMP
  files, or hand-made pair dumps in the same shape) into template instances
  by locating the single differing verb token.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataFormatError
from .lexicon import Lexicon, inflect

log = logging.getLogger(__name__)

SINGULAR = "singular"
PLURAL = "plural"
NUMBERS = (SINGULAR, PLURAL)

DATASET_ML = "ML"
DATASET_BLIMP = "BLIMP"
DATASET_USER = "USER"
DATASETS = (DATASET_ML, DATASET_BLIMP, DATASET_USER)

# Canonical construction row order for score tables (templated agreement
# constructions first, then the BLiMP aggregate row).
CONSTRUCTION_ORDER = (
    "Simple",
    "In a sentential complement",
    "VP coordination",
    "Across prepositional phrase",
    "Across subject relative clause",
    "Across object relative clause",
    "Across object relative (no that)",
    "In object relative clause",
    "In object relative (no that)",
    "BLiMP",
)

_TEMPLATE_FIELDS = ("id", "dataset", "construction", "prefix", "suffix", "number")
_SENTENCE_END = (".", "!", "?")


@dataclass(frozen=True)
class TemplateInstance:
    """A context with a verb slot: prefix + [verb] + suffix.

    `number` is the grammatical number of the subject, i.e. the number the
    verb must agree with, never a property of any particular verb form.
    """

    id: str
    prefix: str
    suffix: str
    number: str
    construction: str
    dataset: str

    def render(self, form: str) -> str:
        return f"{self.prefix}{form}{self.suffix}"


@dataclass(frozen=True)
class NormalizationPolicy:
    """Casing/punctuation requirements taken from model metadata."""

    capitalize_first: bool = False
    require_final_period: bool = False


def template_id(dataset: str, construction: str, prefix: str, suffix: str) -> str:
    """Stable content hash used as the template id by the converter."""
    payload = "\x1f".join((dataset, construction, prefix, suffix))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _validate_instance(t: TemplateInstance, *, path=None, line=None) -> None:
    if not t.id:
        raise DataFormatError("empty template id", path=path, line=line)
    if not t.prefix:
        raise DataFormatError(f"template {t.id!r}: empty prefix", path=path, line=line)
    if t.number not in NUMBERS:
        raise DataFormatError(
            f"template {t.id!r}: number must be one of {NUMBERS}, got {t.number!r}",
            path=path,
            line=line,
        )
    if t.dataset not in DATASETS:
        raise DataFormatError(
            f"template {t.id!r}: dataset must be one of {DATASETS}, got {t.dataset!r}",
            path=path,
            line=line,
        )


def normalize(t: TemplateInstance, policy: NormalizationPolicy) -> TemplateInstance:
    """Apply casing/period normalization; idempotent under a fixed policy.

    The id is recomputed whenever the content changes so that ids keep
    matching the (dataset, construction, prefix, suffix) content hash for
    converter-produced instances.
    """
    prefix, suffix = t.prefix, t.suffix
    if policy.capitalize_first and prefix and not prefix[0].isupper():
        prefix = prefix[0].upper() + prefix[1:]
    if policy.require_final_period and not suffix.rstrip().endswith(_SENTENCE_END):
        suffix = suffix + "."
    if prefix == t.prefix and suffix == t.suffix:
        return t
    return replace(
        t,
        prefix=prefix,
        suffix=suffix,
        id=template_id(t.dataset, t.construction, prefix, suffix),
    )


@dataclass
class LoadStats:
    """Counters accumulated while loading/converting template files."""

    n_loaded: int = 0
    n_duplicates_dropped: int = 0
    n_skipped_not_one_diff: int = 0
    n_skipped_number_unresolved: int = 0
    n_skipped_paradigm: int = 0


@dataclass
class TemplateSet:
    """Loaded templates plus converter bookkeeping.

    `tse_lemmas` maps template id -> sorted original dataset lemmas for that
    context (populated by the pair converter, empty for canonical files).
    """

    instances: list[TemplateInstance]
    stats: LoadStats = field(default_factory=LoadStats)
    tse_lemmas: dict[str, list[str]] = field(default_factory=dict)


def load_template_file(path: str | Path) -> TemplateSet:
    """Load the canonical normalized template file.

    One JSON object per line with exactly the fields
    {id, dataset, construction, prefix, suffix, number}. Duplicate
    (prefix, suffix) pairs within a dataset are dropped with a warning
    counter; duplicate ids with differing content are an error.
    """
    path = Path(path)
    instances: list[TemplateInstance] = []
    stats = LoadStats()
    seen_context: set[tuple[str, str, str]] = set()
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"invalid JSON: {exc}", path=path, line=lineno)
            if not isinstance(obj, dict) or set(obj) != set(_TEMPLATE_FIELDS):
                raise DataFormatError(
                    f"expected exactly fields {_TEMPLATE_FIELDS}",
                    path=path,
                    line=lineno,
                )
            t = TemplateInstance(
                id=str(obj["id"]),
                prefix=str(obj["prefix"]),
                suffix=str(obj["suffix"]),
                number=str(obj["number"]),
                construction=str(obj["construction"]),
                dataset=str(obj["dataset"]),
            )
            _validate_instance(t, path=path, line=lineno)
            key = (t.dataset, t.prefix, t.suffix)
            if key in seen_context:
                stats.n_duplicates_dropped += 1
                log.warning("%s:%d: duplicate context dropped (%r)", path, lineno, t.id)
                continue
            if t.id in seen_ids:
                raise DataFormatError(
                    f"duplicate template id {t.id!r} with new content", path=path, line=lineno
                )
            seen_context.add(key)
            seen_ids.add(t.id)
            instances.append(t)
            stats.n_loaded += 1
    return TemplateSet(instances, stats)


def write_template_file(instances: Iterable[TemplateInstance], path: str | Path) -> None:
    """Write the canonical normalized template file (fixed field order, LF)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in instances:
            record = {
                "id": t.id,
                "dataset": t.dataset,
                "construction": t.construction,
                "prefix": t.prefix,
                "suffix": t.suffix,
                "number": t.number,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _peel_punctuation(good_tok: str, bad_tok: str) -> tuple[str, str, str, str]:
    """Strip shared leading/trailing non-letter characters off a token pair.

    Returns (lead, good_core, bad_core, trail); the cores keep interior
    punctuation (apostrophes, hyphens).
    """
    lead = ""
    while good_tok and bad_tok and good_tok[0] == bad_tok[0] and not good_tok[0].isalpha():
        lead += good_tok[0]
        good_tok, bad_tok = good_tok[1:], bad_tok[1:]
    trail = ""
    while good_tok and bad_tok and good_tok[-1] == bad_tok[-1] and not good_tok[-1].isalpha():
        trail = good_tok[-1] + trail
        good_tok, bad_tok = good_tok[:-1], bad_tok[:-1]
    return lead, good_tok, bad_tok, trail


def diff_pair(good: str, bad: str) -> tuple[str, str, str, str] | None:
    """Split a minimal pair around its single differing token.

    Returns (prefix, suffix, good_form, bad_form), or None when the
    sentences do not differ in exactly one whitespace-delimited position.
    """
    g, b = good.split(), bad.split()
    if len(g) != len(b):
        return None
    diffs = [i for i, (x, y) in enumerate(zip(g, b)) if x != y]
    if len(diffs) != 1:
        return None
    i = diffs[0]
    lead, good_form, bad_form, trail = _peel_punctuation(g[i], b[i])
    if not good_form or not bad_form or good_form == bad_form:
        return None
    prefix = (" ".join(g[:i]) + " " if i > 0 else "") + lead
    suffix = trail + (" " + " ".join(g[i + 1:]) if i + 1 < len(g) else "")
    return prefix, suffix, good_form, bad_form


def infer_number(
    good_form: str,
    bad_form: str,
    lexicon: Lexicon | None = None,
    overrides: Mapping[str, tuple[str, str]] | None = None,
) -> tuple[str, str] | None:
    """Infer (subject number, lemma) from the grammatical verb form.

    Looks the good form up in the lexicon's pair table when one is given,
    then falls back to the inflection rule table applied to the pair itself.
    Returns None when neither route resolves it.
    """
    if lexicon is not None:
        index = lexicon.form_index()
        hit = index.get(good_form)
        if hit is not None:
            lemma, number_of_form = hit
            pair = inflect(lemma, overrides)
            if pair.other_form(number_of_form) == bad_form:
                return number_of_form, lemma
    # good form is the bare (plural) lemma whose singular is the bad form
    if inflect(good_form, overrides).singular_form == bad_form:
        return PLURAL, good_form
    # bad form is the bare lemma whose singular is the good form
    if inflect(bad_form, overrides).singular_form == good_form:
        return SINGULAR, bad_form
    if (good_form, bad_form) == ("are", "is"):
        return PLURAL, "be"
    if (good_form, bad_form) == ("is", "are"):
        return SINGULAR, "be"
    return None


def load_minimal_pairs(
    path: str | Path,
    *,
    dataset: str = DATASET_BLIMP,
    construction: str = "BLiMP",
    construction_from_uid: bool = False,
    paradigms: Sequence[str] | None = None,
    lexicon: Lexicon | None = None,
    overrides: Mapping[str, tuple[str, str]] | None = None,
    policy: NormalizationPolicy | None = None,
) -> TemplateSet:
    """Convert raw good/bad sentence-pair records to template instances.

    Input is a JSONL stream with at least {sentence_good, sentence_bad};
    optional fields: "number" (explicit subject-number annotation, preferred
    over inference), "construction" (overrides the default label), "UID"
    (BLiMP paradigm name, used by `paradigms` filtering and
    `construction_from_uid`). Pairs differing in other than exactly one
    token position are skipped with a counter; so are pairs whose number
    cannot be resolved. Unique contexts are kept once, and the dataset
    lemmas observed for each context accumulate into `tse_lemmas`.
    """
    path = Path(path)
    stats = LoadStats()
    instances: list[TemplateInstance] = []
    lemma_sets: dict[str, set[str]] = {}
    by_context: dict[tuple[str, str], str] = {}
    keep_paradigms = set(paradigms) if paradigms is not None else None

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"invalid JSON: {exc}", path=path, line=lineno)
            if "sentence_good" not in obj or "sentence_bad" not in obj:
                raise DataFormatError(
                    "record needs sentence_good and sentence_bad", path=path, line=lineno
                )
            uid = obj.get("UID")
            if keep_paradigms is not None and uid not in keep_paradigms:
                stats.n_skipped_paradigm += 1
                continue
            split = diff_pair(str(obj["sentence_good"]), str(obj["sentence_bad"]))
            if split is None:
                stats.n_skipped_not_one_diff += 1
                continue
            prefix, suffix, good_form, bad_form = split

            inferred = infer_number(good_form, bad_form, lexicon, overrides)
            annotated = obj.get("number")
            if annotated is not None:
                if annotated not in NUMBERS:
                    raise DataFormatError(
                        f"number must be one of {NUMBERS}, got {annotated!r}",
                        path=path,
                        line=lineno,
                    )
                number = annotated
                lemma = inferred[1] if inferred else None
            elif inferred is not None:
                number, lemma = inferred
            else:
                stats.n_skipped_number_unresolved += 1
                continue

            label = str(obj.get("construction") or (uid if construction_from_uid and uid else construction))
            t = TemplateInstance(
                id=template_id(dataset, label, prefix, suffix),
                prefix=prefix,
                suffix=suffix,
                number=number,
                construction=label,
                dataset=dataset,
            )
            if policy is not None:
                t = normalize(t, policy)
            _validate_instance(t, path=path, line=lineno)

            key = (t.prefix, t.suffix)
            if key in by_context:
                stats.n_duplicates_dropped += 1
                existing = by_context[key]
                if lemma:
                    lemma_sets.setdefault(existing, set()).add(lemma)
                continue
            by_context[key] = t.id
            if lemma:
                lemma_sets.setdefault(t.id, set()).add(lemma)
            instances.append(t)
            stats.n_loaded += 1

    tse = {tid: sorted(lemmas) for tid, lemmas in lemma_sets.items()}
    return TemplateSet(instances, stats, tse)


def load_tse_lemmas(path: str | Path) -> dict[str, list[str]]:
    """Load the classic-TSE sidecar: JSON object {template_id: [lemma, ...]}."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"invalid JSON: {exc}", path=path)
    if not isinstance(obj, dict):
        raise DataFormatError("sidecar must be a JSON object", path=path)
    out: dict[str, list[str]] = {}
    for tid, lemmas in obj.items():
        if not isinstance(lemmas, list) or not all(isinstance(x, str) for x in lemmas):
            raise DataFormatError(f"template {tid!r}: lemma list expected", path=path)
        out[str(tid)] = sorted(lemmas)
    return out


def write_tse_lemmas(mapping: Mapping[str, Sequence[str]], path: str | Path) -> None:
    path = Path(path)
    payload = {tid: sorted(lemmas) for tid, lemmas in sorted(mapping.items())}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
