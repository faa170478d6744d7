"""Verb lemma lexicon: loading, third-person present inflection, vocabulary filtering.

A lexicon is an ordered set of (lemma, singular form, plural form) triples.
The plural (third person plural present) form of a regular English verb is
the bare lemma; the singular (third person singular present) form is derived
by a fixed orthographic rule table, with "be" and "have" special-cased and a
user-supplied exceptions file overriding anything the rules get wrong
(e.g. stomach -> stomachs).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import DataFormatError, EmptyLexiconError

log = logging.getLogger(__name__)

LEMMA_RE = re.compile(r"[a-z]+(?:-[a-z]+)*")

_VOWELS = "aeiou"
_ES_ENDINGS = ("s", "x", "z", "ch", "sh", "o")

# Shipped data files (merged lemma list, reject list, rule exceptions).
DEFAULT_LEMMAS = "lemmas.txt"
DEFAULT_REJECT_LIST = "reject_list.txt"
DEFAULT_EXCEPTIONS = "inflection_exceptions.tsv"


def data_path(name: str) -> Path:
    """Filesystem path of a shipped data file."""
    return Path(str(resources.files("numagree").joinpath("data", name)))


def is_valid_lemma(word: str) -> bool:
    return bool(LEMMA_RE.fullmatch(word))


def rule_singular(base: str) -> str:
    """Third person singular present form by the fixed rule table."""
    if base == "be":
        return "is"
    if base == "have":
        return "has"
    if base.endswith(_ES_ENDINGS):
        return base + "es"
    if base.endswith("y") and len(base) > 1 and base[-2] not in _VOWELS:
        return base[:-1] + "ies"
    return base + "s"


@dataclass(frozen=True)
class InflectionPair:
    """A lemma with its two third-person present forms.

    singular_form and plural_form always differ; plural_form equals the
    lemma itself for every verb except "be" (is/are).
    """

    lemma: str
    singular_form: str
    plural_form: str

    def form(self, number: str) -> str:
        return self.singular_form if number == "singular" else self.plural_form

    def other_form(self, number: str) -> str:
        return self.plural_form if number == "singular" else self.singular_form


def inflect(lemma: str, overrides: Mapping[str, tuple[str, str]] | None = None) -> InflectionPair:
    """Inflect a lemma into its singular/plural present forms.

    Total over valid lemmas. `overrides` maps lemma -> (singular, plural)
    and wins over the rule table.
    """
    if overrides and lemma in overrides:
        singular, plural = overrides[lemma]
        return InflectionPair(lemma, singular, plural)
    plural = "are" if lemma == "be" else lemma
    return InflectionPair(lemma, rule_singular(lemma), plural)


@dataclass(frozen=True)
class Lexicon:
    """Deduplicated, lemma-sorted collection of inflection pairs."""

    pairs: tuple[InflectionPair, ...]
    source_tags: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[InflectionPair]:
        return iter(self.pairs)

    def __contains__(self, lemma: str) -> bool:
        return any(p.lemma == lemma for p in self.pairs)

    def lemmas(self) -> tuple[str, ...]:
        return tuple(p.lemma for p in self.pairs)

    def forms(self) -> tuple[str, ...]:
        """All inflection forms, both numbers, in pair order."""
        out: list[str] = []
        for p in self.pairs:
            out.append(p.singular_form)
            out.append(p.plural_form)
        return tuple(out)

    def form_index(self) -> dict[str, tuple[str, str]]:
        """Map each form to (lemma, number-of-that-form).

        On collisions (a form shared by two lemmas) the lemma-sorted first
        entry wins, deterministically.
        """
        index: dict[str, tuple[str, str]] = {}
        for p in self.pairs:
            index.setdefault(p.singular_form, (p.lemma, "singular"))
            index.setdefault(p.plural_form, (p.lemma, "plural"))
        return index

    def without(self, rejected: Iterable[str]) -> "Lexicon":
        """Copy of this lexicon minus the rejected lemmas."""
        drop = set(rejected)
        kept = tuple(p for p in self.pairs if p.lemma not in drop)
        tags = {p.lemma: self.source_tags.get(p.lemma, frozenset()) for p in kept}
        return Lexicon(kept, tags)


def build_lexicon(
    lemmas: Iterable[str],
    *,
    source_tags: Mapping[str, frozenset[str]] | None = None,
    overrides: Mapping[str, tuple[str, str]] | None = None,
) -> Lexicon:
    """Sort, deduplicate and inflect lemmas into a Lexicon."""
    unique = sorted(set(lemmas))
    pairs = tuple(inflect(lemma, overrides) for lemma in unique)
    for p in pairs:
        if p.singular_form == p.plural_form:
            raise DataFormatError(
                f"lemma {p.lemma!r} inflects to identical singular and plural forms"
            )
    tags = {
        lemma: (source_tags or {}).get(lemma, frozenset()) for lemma in unique
    }
    return Lexicon(pairs, tags)


def load_lemma_list(
    path: str | Path,
    *,
    source_tag: str | None = None,
    overrides: Mapping[str, tuple[str, str]] | None = None,
) -> Lexicon:
    """Load a lemma-per-line file into a Lexicon.

    '#' starts a comment line, blank lines are skipped, duplicates are merged
    silently (provenance union). Raises EmptyLexiconError if nothing is left.
    """
    path = Path(path)
    tag = source_tag if source_tag is not None else path.stem
    lemmas: list[str] = []
    tags: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not is_valid_lemma(line):
                raise DataFormatError(
                    f"invalid lemma {line!r} (lowercase letters and hyphens only)",
                    path=path,
                    line=lineno,
                )
            lemmas.append(line)
            tags.setdefault(line, set()).add(tag)
    if not lemmas:
        raise EmptyLexiconError(f"empty lexicon: no lemmas in {path}")
    frozen = {lemma: frozenset(ts) for lemma, ts in tags.items()}
    return Lexicon(
        tuple(inflect(lemma, overrides) for lemma in sorted(set(lemmas))), frozen
    )


def merge_lexicons(lexicons: Sequence[Lexicon]) -> Lexicon:
    """Union of several lexicons; duplicate lemmas keep the first pair seen
    and union their provenance tags."""
    pairs: dict[str, InflectionPair] = {}
    tags: dict[str, set[str]] = {}
    for lex in lexicons:
        for p in lex.pairs:
            pairs.setdefault(p.lemma, p)
            tags.setdefault(p.lemma, set()).update(lex.source_tags.get(p.lemma, ()))
    ordered = tuple(pairs[lemma] for lemma in sorted(pairs))
    return Lexicon(ordered, {k: frozenset(v) for k, v in tags.items()})


def load_exceptions(path: str | Path) -> dict[str, tuple[str, str]]:
    """Load an inflection exceptions file: lemma<TAB>singular<TAB>plural."""
    path = Path(path)
    out: dict[str, tuple[str, str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataFormatError(
                    f"expected 3 tab-separated fields, got {len(parts)}",
                    path=path,
                    line=lineno,
                )
            lemma, singular, plural = (part.strip() for part in parts)
            if singular == plural:
                raise DataFormatError(
                    f"identical singular and plural for {lemma!r}", path=path, line=lineno
                )
            if plural != lemma and lemma != "be":
                raise DataFormatError(
                    f"plural form must equal the lemma for {lemma!r}", path=path, line=lineno
                )
            out[lemma] = (singular, plural)
    return out


def load_reject_list(path: str | Path) -> frozenset[str]:
    """Load a word-per-line reject list ('#' comments allowed)."""
    path = Path(path)
    words = set()
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                words.add(line)
    return frozenset(words)


@dataclass(frozen=True)
class VocabFilterStats:
    """Bookkeeping from a vocabulary-eligibility filter pass."""

    n_input: int
    n_kept: int

    @property
    def n_dropped(self) -> int:
        return self.n_input - self.n_kept

    @property
    def empty(self) -> bool:
        return self.n_kept == 0


def filter_by_vocabulary(
    lexicon: Lexicon, vocab_oracle: Callable[[str], bool]
) -> tuple[Lexicon, VocabFilterStats]:
    """Keep exactly the pairs whose both forms the oracle accepts.

    Never raises; an empty result is legal and flagged in the stats.
    """
    kept = tuple(
        p for p in lexicon.pairs
        if vocab_oracle(p.singular_form) and vocab_oracle(p.plural_form)
    )
    stats = VocabFilterStats(n_input=len(lexicon.pairs), n_kept=len(kept))
    if stats.empty:
        log.warning("vocabulary filter removed every pair (%d in)", stats.n_input)
    tags = {p.lemma: lexicon.source_tags.get(p.lemma, frozenset()) for p in kept}
    return Lexicon(kept, tags), stats


def load_default_lexicon(
    *,
    apply_reject_list: bool = True,
    overrides: Mapping[str, tuple[str, str]] | None = None,
) -> Lexicon:
    """The shipped merged lemma list with shipped exceptions (and reject list)."""
    if overrides is None:
        overrides = load_exceptions(data_path(DEFAULT_EXCEPTIONS))
    lex = load_lemma_list(data_path(DEFAULT_LEMMAS), source_tag="merged", overrides=overrides)
    if apply_reject_list:
        lex = lex.without(load_reject_list(data_path(DEFAULT_REJECT_LIST)))
    return lex
