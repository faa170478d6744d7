"""TSE/EW/MW scoring: spec'd values, properties, brute-force oracle."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    make_template,
    oracle_ew,
    oracle_mw,
    pair_for,
    random_case,
    synthetic_distribution,
)
from numagree.backend import SyntheticBackend, TemplateDistribution, TokenProbRecord
from numagree.errors import MissingFormError
from numagree.lexicon import Lexicon, build_lexicon
from numagree.metrics import (
    EXCLUDED_NO_ELIGIBLE_LEMMAS,
    EXCLUDED_ZERO_MASS,
    TemplateScore,
    aggregate,
    classic_tse_score,
    ew_score,
    mw_score,
    score_template,
    tse_indicator,
)

TOY = {"are": 0.55, "exist": 0.15, "exists": 0.25, "is": 0.05}


@pytest.fixture
def toy_dist():
    return synthetic_distribution("toy", TOY)


@pytest.fixture
def toy_lexicon():
    return build_lexicon(["be", "exist"])


class TestTseIndicator:
    def test_correct_wins(self, toy_dist):
        assert tse_indicator(toy_dist, pair_for("be"), "plural") == 1

    def test_incorrect_wins(self, toy_dist):
        assert tse_indicator(toy_dist, pair_for("exist"), "plural") == 0

    def test_exact_tie_scores_zero(self):
        dist = synthetic_distribution("t", {"walks": 0.5, "walk": 0.5})
        assert tse_indicator(dist, pair_for("walk"), "plural") == 0

    def test_number_selects_correct_form(self, toy_dist):
        assert tse_indicator(toy_dist, pair_for("be"), "singular") == 0

    def test_missing_form_is_an_error(self, toy_dist):
        with pytest.raises(MissingFormError, match="walk"):
            tse_indicator(toy_dist, pair_for("walk"), "plural")


class TestEwScore:
    def test_toy_half(self, toy_dist, toy_lexicon):
        assert ew_score(toy_dist, toy_lexicon, "plural") == 0.5

    def test_single_pair_equals_indicator(self, toy_dist):
        lex = build_lexicon(["be"])
        assert ew_score(toy_dist, lex, "plural") == tse_indicator(
            toy_dist, pair_for("be"), "plural")

    def test_all_correct_is_one(self):
        dist = synthetic_distribution("t", {"are": 0.6, "is": 0.1, "exist": 0.2, "exists": 0.1})
        assert ew_score(dist, build_lexicon(["be", "exist"]), "plural") == 1.0

    def test_no_eligible_pairs_is_absent(self, toy_dist):
        assert ew_score(toy_dist, build_lexicon(["walk"]), "plural") is None

    def test_missing_pairs_are_excluded_not_fatal(self, toy_dist):
        lex = build_lexicon(["be", "walk"])
        assert ew_score(toy_dist, lex, "plural") == 1.0


class TestMwScore:
    def test_toy_value(self, toy_dist, toy_lexicon):
        # (0.55 + 0.15) / (0.55 + 0.15 + 0.05 + 0.25)
        assert mw_score(toy_dist, toy_lexicon, "plural") == pytest.approx(0.7, abs=1e-12)

    def test_zero_mass_is_absent(self):
        dist = synthetic_distribution(
            "t", {"are": 0.0, "is": 0.0, "unk": 1.0}, ["are", "is"])
        assert mw_score(dist, build_lexicon(["be"]), "plural") is None

    def test_mass_only_on_correct_forms(self):
        dist = synthetic_distribution(
            "t", {"are": 0.6, "exist": 0.4, "is": 0.0, "exists": 0.0})
        assert mw_score(dist, build_lexicon(["be", "exist"]), "plural") == 1.0


class TestClassicTse:
    def test_toy_with_be_only(self, toy_dist):
        assert classic_tse_score(toy_dist, [pair_for("be")], "plural") == 1.0

    def test_full_lexicon_equals_ew(self, toy_dist, toy_lexicon):
        assert classic_tse_score(
            toy_dist, list(toy_lexicon), "plural"
        ) == ew_score(toy_dist, toy_lexicon, "plural")

    def test_empty_set_is_absent(self, toy_dist):
        assert classic_tse_score(toy_dist, [], "plural") is None


class TestScoreTemplate:
    def test_toy(self, toy_dist, toy_lexicon):
        score = score_template(toy_dist, toy_lexicon, "plural", tse_pairs=[pair_for("be")])
        assert score.tse == 1.0
        assert score.ew == 0.5
        assert score.mw == pytest.approx(0.7, abs=1e-12)
        assert score.n_lemmas_used == 2
        assert not score.excluded

    def test_no_eligible_lemmas_excluded_without_scores(self, toy_dist):
        score = score_template(toy_dist, build_lexicon(["walk"]), "plural")
        assert score.excluded_reason == EXCLUDED_NO_ELIGIBLE_LEMMAS
        assert score.tse is None and score.ew is None and score.mw is None

    def test_zero_mass_excluded_without_scores(self):
        dist = synthetic_distribution(
            "t", {"are": 0.0, "is": 0.0, "unk": 1.0}, ["are", "is"])
        score = score_template(dist, build_lexicon(["be"]), "plural")
        assert score.excluded_reason == EXCLUDED_ZERO_MASS
        assert score.tse is None and score.ew is None and score.mw is None


class TestAggregate:
    def test_mean_of_two(self):
        scores = [
            TemplateScore("a", mw=0.6, ew=1.0, n_lemmas_used=1),
            TemplateScore("b", mw=0.8, ew=0.0, n_lemmas_used=1),
        ]
        report = aggregate(scores, {"a": "Simple", "b": "Simple"})
        row = report.row("Simple")
        assert row.mw_mean == pytest.approx(0.7, abs=1e-12)
        assert row.ew_mean == 0.5
        assert row.n_templates == 2
        assert row.n_excluded == 0

    def test_excluded_counted_not_averaged(self):
        scores = [
            TemplateScore("a", mw=0.6, ew=0.5, n_lemmas_used=1),
            TemplateScore("b", mw=0.8, ew=0.5, n_lemmas_used=1),
            TemplateScore("c", excluded_reason=EXCLUDED_ZERO_MASS),
        ]
        report = aggregate(scores, {k: "Simple" for k in "abc"})
        row = report.row("Simple")
        assert row.mw_mean == pytest.approx(0.7, abs=1e-12)
        assert row.n_templates == 3
        assert row.n_excluded == 1
        assert row.excluded_by_reason == {EXCLUDED_ZERO_MASS: 1}

    def test_rows_follow_canonical_order(self):
        scores = [TemplateScore(k, mw=0.5, ew=0.5, n_lemmas_used=1) for k in "abc"]
        grouping = {"a": "BLiMP", "b": "Simple", "c": "Aardvark clause"}
        report = aggregate(scores, grouping)
        assert [r.construction for r in report.rows] == [
            "Simple", "BLiMP", "Aardvark clause"]


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

def _records_scaled(mapping, scale):
    backend = SyntheticBackend({"t": mapping})
    base = backend.query(make_template("t"), list(mapping))
    records = {
        f: TokenProbRecord(f, r.prob * scale, r.rank, r.cum_before * scale)
        for f, r in base.records.items()
    }
    return TemplateDistribution("t", "m", "bidirectional", records)


@given(st.floats(min_value=0.01, max_value=1.0), st.integers(0, 2**32 - 1))
@settings(max_examples=100)
def test_scale_invariance(scale, seed):
    rng = random.Random(seed)
    lexicon, number, mapping = random_case(rng)
    base = synthetic_distribution("t", mapping)
    scaled = _records_scaled(mapping, scale)
    for pair in lexicon:
        assert tse_indicator(base, pair, number) == tse_indicator(scaled, pair, number)
    assert ew_score(base, lexicon, number) == ew_score(scaled, lexicon, number)
    mw_base = mw_score(base, lexicon, number)
    mw_scaled = mw_score(scaled, lexicon, number)
    assert mw_scaled == pytest.approx(mw_base, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200)
def test_mw_equals_mass_weighted_mean_of_pair_fractions(seed):
    rng = random.Random(seed)
    lexicon, number, mapping = random_case(rng)
    dist = synthetic_distribution("t", mapping)
    num = 0.0
    den = 0.0
    for pair in lexicon:
        p_c = mapping[pair.form(number)]
        p_i = mapping[pair.other_form(number)]
        weight = p_c + p_i
        if weight == 0:
            continue
        num += weight * (p_c / weight)
        den += weight
    expected = num / den
    assert mw_score(dist, lexicon, number) == pytest.approx(expected, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100)
def test_lexicon_permutation_never_changes_scores(seed):
    rng = random.Random(seed)
    lexicon, number, mapping = random_case(rng)
    dist = synthetic_distribution("t", mapping)
    shuffled_pairs = list(lexicon.pairs)
    rng.shuffle(shuffled_pairs)
    shuffled = Lexicon(tuple(shuffled_pairs), lexicon.source_tags)
    assert ew_score(dist, lexicon, number) == ew_score(dist, shuffled, number)
    assert mw_score(dist, lexicon, number) == pytest.approx(
        mw_score(dist, shuffled, number), abs=1e-15)


def test_brute_force_oracle_on_random_distributions():
    rng = random.Random(20240817)
    for _ in range(300):
        lexicon, number, mapping = random_case(rng)
        dist = synthetic_distribution("t", mapping)
        ew = ew_score(dist, lexicon, number)
        mw = mw_score(dist, lexicon, number)
        assert ew == pytest.approx(float(oracle_ew(mapping, lexicon, number)), abs=1e-12)
        assert mw == pytest.approx(float(oracle_mw(mapping, lexicon, number)), abs=1e-12)
