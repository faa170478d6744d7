"""Percentile-restricted scoring: top-p (nucleus) and bottom-p variants.

A top-p cutoff keeps the smallest prefix of the descending-sorted full
distribution whose cumulative mass reaches p/100 — the same token set a
nucleus sampler with nucleus p would draw from. A bottom-p cutoff keeps the
analogous suffix of the tail. A candidate token occupies the mass interval
[cum_before, cum_before + prob) of the full distribution, so membership is
computable from the stored sufficient statistics alone:

    top:    weight = clamp((p/100 - cum_before) / prob, 0, 1)
    bottom: weight = clamp((cum_before + prob - (1 - p/100)) / prob, 0, 1)

Zero-probability tokens sit outside every nucleus (weight 0 for top) and at
the extreme tail (weight 1 for bottom). At most one token per distribution
straddles a cutoff (fractional weight); scores are then linearly
interpolated between the with-token and without-token branch scores,
S = w * S_with + (1 - w) * S_without, which makes every score a continuous
piecewise-linear function of the threshold mass. When one branch is
undefined (empty set), the defined branch is used with full weight and a
fallback counter increments.

Note the p=100 top cutoff reproduces untruncated scores bit-for-bit only
when every candidate probability is strictly positive, because untruncated
scoring includes zero-probability pairs while no top nucleus ever does.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .backend import TemplateDistribution
from .errors import DistributionInvariantError
from .lexicon import InflectionPair, Lexicon
from .metrics import (
    EXCLUDED_NO_ELIGIBLE_LEMMAS,
    EXCLUDED_ZERO_MASS,
    construction_sort_key,
    eligible_pairs,
)
from .templates import TemplateInstance

TOP = "top"
BOTTOM = "bottom"
KINDS = (TOP, BOTTOM)

# Default cutoff grids for sweeps (percent).
DEFAULT_TOP_GRID = (10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 95.0, 97.0, 100.0)
DEFAULT_BOTTOM_GRID = (50.0, 10.0, 1.0, 0.1, 0.01, 0.001, 0.0001)


@dataclass(frozen=True)
class PercentileCutoff:
    """A top- or bottom-p restriction; p is a percent in (0, 100]."""

    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 < self.p <= 100.0:
            raise ValueError(f"p must be in (0, 100], got {self.p!r}")

    @property
    def threshold_mass(self) -> float:
        return self.p / 100.0


def _clamp01(x: float) -> float:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


def membership(dist: TemplateDistribution, cutoff: PercentileCutoff) -> dict[str, float]:
    """Fractional cutoff-set membership weight for every candidate token."""
    t = cutoff.threshold_mass
    out: dict[str, float] = {}
    if cutoff.kind == TOP:
        for form, rec in dist.records.items():
            if rec.prob == 0.0:
                out[form] = 0.0
            elif t >= 1.0:
                # the full distribution is the nucleus; the prefix-sum of the
                # last-ranked token may overshoot 1 by an ulp, so don't let
                # the ratio formula leave it marginally outside
                out[form] = 1.0
            else:
                out[form] = _clamp01((t - rec.cum_before) / rec.prob)
    else:
        lower = 1.0 - t
        for form, rec in dist.records.items():
            if rec.prob == 0.0:
                out[form] = 1.0
            else:
                out[form] = _clamp01((rec.cum_before + rec.prob - lower) / rec.prob)
    return out


@dataclass(frozen=True)
class TruncatedTemplateScore:
    """EW/MW under one cutoff plus coverage diagnostics for that template."""

    template_id: str
    ew: float | None
    mw: float | None
    n_lemmas_used: int
    mass_counted: float
    invalid: bool
    ew_excluded_reason: str | None = None
    mw_excluded_reason: str | None = None
    n_fallback_branches: int = 0


def _lemma_inclusion(w_singular: float, w_plural: float, kind: str, requires_both: bool) -> float:
    if kind == BOTTOM or requires_both:
        return min(w_singular, w_plural)
    return max(w_singular, w_plural)


def _branch(
    dist: TemplateDistribution,
    pairs: Sequence[InflectionPair],
    number: str,
    weights: Mapping[str, float],
    kind: str,
    requires_both: bool,
) -> tuple[float | None, float | None, int]:
    """EW/MW over one branch whose weights are all 0 or 1.

    Accumulates in lexicon-pair order with the same float operations as the
    untruncated scorers, so a full-inclusion branch is bit-identical to them.
    """
    numerator = 0.0
    denominator = 0.0
    indicator_sum = 0
    n_included = 0
    for pair in pairs:
        p_correct = dist.records[pair.form(number)].prob
        p_incorrect = dist.records[pair.other_form(number)].prob
        w_correct = weights[pair.form(number)]
        w_incorrect = weights[pair.other_form(number)]
        numerator += p_correct if w_correct > 0.0 else 0.0
        denominator += (p_correct if w_correct > 0.0 else 0.0) + (
            p_incorrect if w_incorrect > 0.0 else 0.0
        )
        u = _lemma_inclusion(
            weights[pair.singular_form], weights[pair.plural_form], kind, requires_both
        )
        if u > 0.0:
            n_included += 1
            indicator_sum += 1 if p_correct > p_incorrect else 0
    ew = indicator_sum / n_included if n_included else None
    mw = numerator / denominator if denominator > 0.0 else None
    return ew, mw, n_included


def _interpolate(
    w: float, s_with: float | None, s_without: float | None
) -> tuple[float | None, int]:
    """Linear interpolation across the straddling token; falls back to the
    defined branch when the other is undefined."""
    if s_with is not None and s_without is not None:
        return w * s_with + (1.0 - w) * s_without, 0
    if s_with is not None:
        return s_with, 1
    if s_without is not None:
        return s_without, 1
    return None, 0


def truncated_scores(
    dist: TemplateDistribution,
    lexicon: Lexicon,
    number: str,
    cutoff: PercentileCutoff,
    *,
    top_requires_both: bool = False,
) -> TruncatedTemplateScore:
    """EW/MW restricted to a percentile cutoff, with interpolation.

    For top cutoffs a lemma participates in EW when either inflection
    intersects the nucleus (switchable to both via top_requires_both); for
    bottom cutoffs both inflections must sit in the tail set. MW sums run
    over the individual inflection tokens inside the set. The indicator
    comparison always uses raw probabilities of both forms.
    """
    requires_both = top_requires_both and cutoff.kind == TOP
    pairs = eligible_pairs(dist, lexicon)
    weights = membership(dist, cutoff)

    # every distinct candidate token belonging to some lexicon inflection
    lex_forms: dict[str, None] = {}
    for pair in lexicon:
        for form in (pair.singular_form, pair.plural_form):
            if form in dist.records:
                lex_forms.setdefault(form, None)

    mass_counted = 0.0
    any_inside = False
    for form in lex_forms:
        w = weights[form]
        mass_counted += w * dist.records[form].prob
        if w > 0.0:
            any_inside = True
    invalid = not any_inside

    if not pairs:
        return TruncatedTemplateScore(
            template_id=dist.template_id,
            ew=None,
            mw=None,
            n_lemmas_used=0,
            mass_counted=mass_counted,
            invalid=invalid,
            ew_excluded_reason=EXCLUDED_NO_ELIGIBLE_LEMMAS,
            mw_excluded_reason=EXCLUDED_ZERO_MASS,
        )

    fractional = [f for f in lex_forms if 0.0 < weights[f] < 1.0]
    if len(fractional) > 1:
        raise DistributionInvariantError(
            f"{len(fractional)} tokens straddle one cutoff (overlapping mass intervals)",
            template_id=dist.template_id,
            field="cum_before",
        )

    fallbacks = 0
    if not fractional:
        ew, mw, n_included = _branch(dist, pairs, number, weights, cutoff.kind, requires_both)
    else:
        straddler = fractional[0]
        w_straddle = weights[straddler]
        with_weights = dict(weights)
        with_weights[straddler] = 1.0
        without_weights = dict(weights)
        without_weights[straddler] = 0.0
        ew_with, mw_with, n_with = _branch(
            dist, pairs, number, with_weights, cutoff.kind, requires_both
        )
        ew_without, mw_without, _ = _branch(
            dist, pairs, number, without_weights, cutoff.kind, requires_both
        )
        ew, fb_ew = _interpolate(w_straddle, ew_with, ew_without)
        mw, fb_mw = _interpolate(w_straddle, mw_with, mw_without)
        fallbacks = fb_ew + fb_mw
        n_included = n_with

    return TruncatedTemplateScore(
        template_id=dist.template_id,
        ew=ew,
        mw=mw,
        n_lemmas_used=n_included,
        mass_counted=mass_counted,
        invalid=invalid,
        ew_excluded_reason=None if ew is not None else EXCLUDED_NO_ELIGIBLE_LEMMAS,
        mw_excluded_reason=None if mw is not None else EXCLUDED_ZERO_MASS,
        n_fallback_branches=fallbacks,
    )


@dataclass(frozen=True)
class CurveRow:
    """One point of a score-vs-cutoff curve, in long (tidy) format."""

    construction: str
    kind: str
    p: float
    metric: str
    value: float | None
    mass_counted: float
    invalid_proportion: float
    n_templates: int
    n_scored: int


def default_cutoffs(
    top_grid: Iterable[float] = DEFAULT_TOP_GRID,
    bottom_grid: Iterable[float] = DEFAULT_BOTTOM_GRID,
) -> list[PercentileCutoff]:
    cutoffs = [PercentileCutoff(TOP, p) for p in top_grid]
    cutoffs += [PercentileCutoff(BOTTOM, p) for p in bottom_grid]
    return cutoffs


def sweep(
    items: Sequence[tuple[TemplateInstance, TemplateDistribution]],
    lexicon: Lexicon,
    cutoffs: Sequence[PercentileCutoff],
    *,
    top_requires_both: bool = False,
) -> list[CurveRow]:
    """Score every template at every cutoff, aggregated per construction.

    Emits one row per (cutoff, construction, metric): the unweighted mean of
    the metric over templates where it is defined, the mean counted mass,
    and the proportion of templates whose cutoff set contains no candidate
    token at all.
    """
    rows: list[CurveRow] = []
    for cutoff in cutoffs:
        per_construction: dict[str, list[TruncatedTemplateScore]] = {}
        for template, dist in items:
            score = truncated_scores(
                dist,
                lexicon,
                template.number,
                cutoff,
                top_requires_both=top_requires_both,
            )
            per_construction.setdefault(template.construction, []).append(score)
        for construction in sorted(per_construction, key=construction_sort_key):
            scores = per_construction[construction]
            n = len(scores)
            mass_mean = sum(s.mass_counted for s in scores) / n
            invalid_proportion = sum(1 for s in scores if s.invalid) / n
            for metric in ("ew", "mw"):
                values = [
                    getattr(s, metric) for s in scores if getattr(s, metric) is not None
                ]
                rows.append(
                    CurveRow(
                        construction=construction,
                        kind=cutoff.kind,
                        p=cutoff.p,
                        metric=metric,
                        value=sum(values) / len(values) if values else None,
                        mass_counted=mass_mean,
                        invalid_proportion=invalid_proportion,
                        n_templates=n,
                        n_scored=len(values),
                    )
                )
    return rows
