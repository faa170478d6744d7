"""Agreement scores for one template and their per-construction aggregation.

Three scores per template:

* tse        — mean correct/incorrect indicator over the dataset's original
               small lemma set (the classic formulation);
* ew         — the same indicator averaged over a large lexicon, measuring
               whether the model conjugates *arbitrary* verbs (systematicity);
* mw         — correct-form probability mass divided by total inflection
               mass, measuring how likely sampled output is to be well
               conjugated (likely behavior).

The indicator uses a strict comparison, so an exact probability tie scores 0.
Lexicon pairs whose forms are missing from the distribution are excluded and
counted, not errors. A template with no eligible pair, or with zero total
inflection mass, is excluded entirely: it carries an exclusion reason and no
scores, and aggregation averages over the non-excluded templates only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .backend import TemplateDistribution
from .errors import MissingFormError
from .lexicon import InflectionPair, Lexicon
from .templates import CONSTRUCTION_ORDER

EXCLUDED_NO_ELIGIBLE_LEMMAS = "no_eligible_lemmas"
EXCLUDED_ZERO_MASS = "zero_mass"

METRICS = ("mw", "ew", "tse")


@dataclass(frozen=True)
class TemplateScore:
    """Scores for one template; excluded templates carry a reason instead."""

    template_id: str
    tse: float | None = None
    ew: float | None = None
    mw: float | None = None
    n_lemmas_used: int = 0
    excluded_reason: str | None = None

    @property
    def excluded(self) -> bool:
        return self.excluded_reason is not None


def tse_indicator(dist: TemplateDistribution, pair: InflectionPair, number: str) -> int:
    """1 iff the correct form is strictly more probable than the incorrect one."""
    correct = pair.form(number)
    incorrect = pair.other_form(number)
    try:
        p_correct = dist.records[correct].prob
        p_incorrect = dist.records[incorrect].prob
    except KeyError as exc:
        raise MissingFormError(
            f"template {dist.template_id!r}: form {exc.args[0]!r} missing from distribution"
        )
    return 1 if p_correct > p_incorrect else 0


def eligible_pairs(
    dist: TemplateDistribution, lexicon: Iterable[InflectionPair]
) -> list[InflectionPair]:
    """Pairs whose both forms have records in the distribution."""
    recs = dist.records
    return [p for p in lexicon if p.singular_form in recs and p.plural_form in recs]


def ew_score(dist: TemplateDistribution, lexicon: Lexicon, number: str) -> float | None:
    """Mean indicator over all eligible pairs; None when no pair is eligible."""
    pairs = eligible_pairs(dist, lexicon)
    if not pairs:
        return None
    total = 0
    for pair in pairs:
        total += tse_indicator(dist, pair, number)
    return total / len(pairs)


def mw_score(dist: TemplateDistribution, lexicon: Lexicon, number: str) -> float | None:
    """Correct-form mass over total inflection mass; None when that mass is 0."""
    pairs = eligible_pairs(dist, lexicon)
    if not pairs:
        return None
    numerator = 0.0
    denominator = 0.0
    for pair in pairs:
        p_correct = dist.records[pair.form(number)].prob
        p_incorrect = dist.records[pair.other_form(number)].prob
        numerator += p_correct
        denominator += p_correct + p_incorrect
    if denominator == 0.0:
        return None
    return numerator / denominator


def classic_tse_score(
    dist: TemplateDistribution, pairs: Sequence[InflectionPair], number: str
) -> float | None:
    """Mean indicator over the dataset's original per-template lemma set."""
    usable = eligible_pairs(dist, pairs)
    if not usable:
        return None
    total = 0
    for pair in usable:
        total += tse_indicator(dist, pair, number)
    return total / len(usable)


def score_template(
    dist: TemplateDistribution,
    lexicon: Lexicon,
    number: str,
    tse_pairs: Sequence[InflectionPair] | None = None,
) -> TemplateScore:
    """Full per-template scoring with exclusion accounting."""
    pairs = eligible_pairs(dist, lexicon)
    if not pairs:
        return TemplateScore(
            template_id=dist.template_id,
            excluded_reason=EXCLUDED_NO_ELIGIBLE_LEMMAS,
        )
    numerator = 0.0
    denominator = 0.0
    indicator_sum = 0
    for pair in pairs:
        p_correct = dist.records[pair.form(number)].prob
        p_incorrect = dist.records[pair.other_form(number)].prob
        numerator += p_correct
        denominator += p_correct + p_incorrect
        indicator_sum += 1 if p_correct > p_incorrect else 0
    if denominator == 0.0:
        return TemplateScore(
            template_id=dist.template_id,
            n_lemmas_used=len(pairs),
            excluded_reason=EXCLUDED_ZERO_MASS,
        )
    tse = classic_tse_score(dist, tse_pairs, number) if tse_pairs else None
    return TemplateScore(
        template_id=dist.template_id,
        tse=tse,
        ew=indicator_sum / len(pairs),
        mw=numerator / denominator,
        n_lemmas_used=len(pairs),
    )


@dataclass(frozen=True)
class ConstructionRow:
    """One aggregated row: unweighted means over non-excluded templates."""

    construction: str
    n_templates: int
    n_excluded: int
    excluded_by_reason: Mapping[str, int]
    mw_mean: float | None
    ew_mean: float | None
    tse_mean: float | None
    n_mw: int
    n_ew: int
    n_tse: int


@dataclass
class ScoreReport:
    rows: list[ConstructionRow] = field(default_factory=list)

    def row(self, construction: str) -> ConstructionRow:
        for row in self.rows:
            if row.construction == construction:
                return row
        raise KeyError(construction)


def _mean(values: list[float]) -> float | None:
    if not values:
        return None
    return sum(values) / len(values)


def construction_sort_key(name: str):
    """Canonical table order: known constructions first, extras alphabetical."""
    try:
        return (0, CONSTRUCTION_ORDER.index(name), name)
    except ValueError:
        return (1, 0, name)


def aggregate(
    scores: Iterable[TemplateScore],
    grouping: Mapping[str, str],
    *,
    default_group: str = "(unknown)",
) -> ScoreReport:
    """Group template scores (template_id -> construction) into report rows."""
    groups: dict[str, list[TemplateScore]] = {}
    for score in scores:
        group = grouping.get(score.template_id, default_group)
        groups.setdefault(group, []).append(score)

    report = ScoreReport()
    for construction in sorted(groups, key=construction_sort_key):
        members = groups[construction]
        by_reason: dict[str, int] = {}
        for s in members:
            if s.excluded_reason is not None:
                by_reason[s.excluded_reason] = by_reason.get(s.excluded_reason, 0) + 1
        mw_values = [s.mw for s in members if s.mw is not None]
        ew_values = [s.ew for s in members if s.ew is not None]
        tse_values = [s.tse for s in members if s.tse is not None]
        report.rows.append(
            ConstructionRow(
                construction=construction,
                n_templates=len(members),
                n_excluded=sum(by_reason.values()),
                excluded_by_reason=dict(sorted(by_reason.items())),
                mw_mean=_mean(mw_values),
                ew_mean=_mean(ew_values),
                tse_mean=_mean(tse_values),
                n_mw=len(mw_values),
                n_ew=len(ew_values),
                n_tse=len(tse_values),
            )
        )
    return report
