"""Shared fixtures and independent oracles for the test suite.

The oracles deliberately share no code with the engine: they work in exact
Fraction arithmetic straight from the raw probability mappings, enumerate
rather than accumulate, and are only converted to float at the final
comparison.
"""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import pytest

from numagree.backend import SyntheticBackend, TemplateDistribution
from numagree.lexicon import InflectionPair, Lexicon, build_lexicon
from numagree.templates import TemplateInstance

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def make_template(tid: str, number: str = "plural", construction: str = "Simple") -> TemplateInstance:
    return TemplateInstance(
        id=tid,
        prefix="The things ",
        suffix=".",
        number=number,
        construction=construction,
        dataset="USER",
    )


def synthetic_distribution(
    tid: str, mapping: dict[str, float], candidates: list[str] | None = None
) -> TemplateDistribution:
    """Distribution for one template from an explicit full mapping."""
    backend = SyntheticBackend({tid: mapping})
    return backend.query(make_template(tid), candidates or list(mapping))


_WORDS = [
    "arrive", "bake", "carry", "dance", "exist", "fetch", "grow", "hop",
    "itch", "jump", "kneel", "laugh", "march", "nod", "open", "pass",
]


def random_case(rng: random.Random, max_pairs: int = 8):
    """One random scoring scenario: lexicon, number, raw mapping, filler mass.

    Probabilities are random positive floats normalized to sum 1 (within the
    synthetic backend's 1e-12 budget); a filler token keeps candidate mass
    away from 1 so ranks/cum_before see non-candidate structure too.
    """
    n_pairs = rng.randint(1, max_pairs)
    lemmas = rng.sample(_WORDS, n_pairs)
    lexicon = build_lexicon(lemmas)
    number = rng.choice(["singular", "plural"])
    raw: dict[str, float] = {}
    for pair in lexicon:
        raw[pair.singular_form] = rng.uniform(0.001, 1.0)
        raw[pair.plural_form] = rng.uniform(0.001, 1.0)
    raw["zzfiller"] = rng.uniform(0.001, 1.0)
    total = sum(raw.values())
    mapping = {form: value / total for form, value in raw.items()}
    return lexicon, number, mapping


def oracle_ew(mapping: dict[str, float], lexicon: Lexicon, number: str) -> Fraction | None:
    """Exact equally-weighted score by direct enumeration."""
    wins = []
    for pair in lexicon:
        correct = pair.singular_form if number == "singular" else pair.plural_form
        wrong = pair.plural_form if number == "singular" else pair.singular_form
        if correct not in mapping or wrong not in mapping:
            continue
        wins.append(1 if Fraction(mapping[correct]) > Fraction(mapping[wrong]) else 0)
    if not wins:
        return None
    return Fraction(sum(wins), len(wins))


def oracle_mw(mapping: dict[str, float], lexicon: Lexicon, number: str) -> Fraction | None:
    """Exact model-weighted score by direct enumeration."""
    top = Fraction(0)
    bottom = Fraction(0)
    seen = False
    for pair in lexicon:
        correct = pair.singular_form if number == "singular" else pair.plural_form
        wrong = pair.plural_form if number == "singular" else pair.singular_form
        if correct not in mapping or wrong not in mapping:
            continue
        seen = True
        top += Fraction(mapping[correct])
        bottom += Fraction(mapping[correct]) + Fraction(mapping[wrong])
    if not seen or bottom == 0:
        return None
    return top / bottom


def pair_for(lemma: str) -> InflectionPair:
    return build_lexicon([lemma]).pairs[0]
