"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one `[ACCEPTANCE] <criterion>: PASS/FAIL` line. Run with
`pytest tests/test_acceptance.py -v -s` to see them inline.
"""

import contextlib
import json
import random
import time
from fractions import Fraction

import pytest

from conftest import FIXTURES, make_template, oracle_ew, oracle_mw, random_case, synthetic_distribution
from numagree.backend import SyntheticBackend, read_dump, write_dump
from numagree.lexicon import Lexicon, build_lexicon, load_lemma_list
from numagree.metrics import (
    EXCLUDED_NO_ELIGIBLE_LEMMAS,
    EXCLUDED_ZERO_MASS,
    ew_score,
    mw_score,
    score_template,
)
from numagree.report import RunConfig, run_score, run_sweep
from numagree.truncation import TOP, PercentileCutoff, truncated_scores


@contextlib.contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


def test_toy_reproduction(tmp_path):
    """Synthetic toy run: TSE 1.0, EW 0.5, MW 0.7 exactly, under a second."""
    with criterion("toy reproduction (TSE 1.0 / EW 0.5 / MW 0.7)"):
        config = RunConfig(
            templates=[str(FIXTURES / "toy_templates.jsonl")],
            backend={"kind": "synthetic", "path": str(FIXTURES / "toy_synthetic.json")},
            lemmas=[str(FIXTURES / "toy_lemmas.txt")],
            tse_lemmas=str(FIXTURES / "toy_tse_lemmas.json"),
            output_dir=str(tmp_path / "toy-out"),
            figures=False,
        )
        started = time.perf_counter()
        report = run_score(config)
        elapsed = time.perf_counter() - started
        row = report.row("Across prepositional phrase")
        assert row.tse_mean == pytest.approx(1.0, abs=1e-12)
        assert row.ew_mean == pytest.approx(0.5, abs=1e-12)
        assert row.mw_mean == pytest.approx(0.7, abs=1e-12)
        # and the same values in the written table
        lines = (tmp_path / "toy-out" / "construction_table.tsv").read_text().splitlines()
        fields = dict(zip(lines[2].split("\t"), lines[3].split("\t")))
        assert float(fields["tse"]) == pytest.approx(1.0, abs=1e-12)
        assert float(fields["ew"]) == pytest.approx(0.5, abs=1e-12)
        assert float(fields["mw"]) == pytest.approx(0.7, abs=1e-12)
        assert elapsed < 1.0, f"toy run took {elapsed:.3f}s"


def test_oracle_equivalence():
    """1,000 random distributions <= 8 pairs vs exact enumeration, 1e-12."""
    with criterion("oracle equivalence (1000 random distributions)"):
        rng = random.Random(1234)
        started = time.perf_counter()
        for _ in range(1000):
            lexicon, number, mapping = random_case(rng, max_pairs=8)
            dist = synthetic_distribution("t", mapping)
            ew = ew_score(dist, lexicon, number)
            mw = mw_score(dist, lexicon, number)
            exact_ew = oracle_ew(mapping, lexicon, number)
            exact_mw = oracle_mw(mapping, lexicon, number)
            assert abs(ew - float(exact_ew)) <= 1e-12
            assert abs(mw - float(exact_mw)) <= 1e-12
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0, f"oracle sweep took {elapsed:.3f}s"


def _positive_fixture_distributions():
    """Every fixture with strictly positive candidate probabilities."""
    cases = []

    toy = SyntheticBackend.from_spec_file(FIXTURES / "toy_synthetic.json")
    cases.append(
        (toy.query(make_template("toy-keys-cabinet"), ["is", "are", "exists", "exist"]),
         build_lexicon(["be", "exist"]), "plural")
    )

    boundary = SyntheticBackend.from_spec_file(FIXTURES / "boundary_synthetic.json")
    cases.append(
        (boundary.query(make_template("boundary-1"), ["meets", "meet", "sees", "see"]),
         build_lexicon(["meet", "see"]), "plural")
    )

    qualitative = SyntheticBackend.from_spec_file(FIXTURES / "qualitative_synthetic.json")
    cases.append(
        (qualitative.query(
            make_template("senators-skater"),
            ["meets", "meet", "sees", "see", "encounters", "encounter"]),
         build_lexicon(["meet", "see", "encounter"]), "plural")
    )

    for dist in read_dump(FIXTURES / "dump_three.jsonl"):
        lemma = {"t1": "be", "t2": "exist", "t3": "meet"}[dist.template_id]
        cases.append((dist, build_lexicon([lemma]), "plural"))

    rng = random.Random(99)
    for _ in range(50):
        lexicon, number, mapping = random_case(rng)
        cases.append((synthetic_distribution("t", mapping), lexicon, number))
    return cases


def test_truncation_identity():
    """Top p=100 equals untruncated scores bit-for-bit on every fixture."""
    with criterion("truncation identity (top p=100 == untruncated)"):
        cutoff = PercentileCutoff(TOP, 100.0)
        for dist, lexicon, number in _positive_fixture_distributions():
            truncated = truncated_scores(dist, lexicon, number, cutoff)
            assert truncated.ew == ew_score(dist, lexicon, number)
            assert truncated.mw == mw_score(dist, lexicon, number)


def test_interpolation_continuity():
    """10,000-point sweep has no jump beyond the largest token mass; the
    hand-derived boundary points (incl. the MW=0.8333 straddle) are exact."""
    with criterion("interpolation continuity and boundary points"):
        spec = json.loads((FIXTURES / "boundary_synthetic.json").read_text())
        mapping = spec["templates"]["boundary-1"]
        candidates = ["meets", "meet", "sees", "see"]
        dist = synthetic_distribution("boundary-1", mapping, candidates)
        lexicon = build_lexicon(["meet", "see"])

        # hand-derived boundary points (exact piecewise-linear values)
        at = lambda p: truncated_scores(dist, lexicon, "plural", PercentileCutoff(TOP, p))
        r50 = at(50.0)
        assert r50.mw == pytest.approx(5.0 / 6.0, abs=1e-12)       # 0.8333 straddle
        assert r50.ew == pytest.approx(0.75, abs=1e-12)
        r40 = at(40.0)
        assert r40.mw == pytest.approx(1.0, abs=1e-12)
        assert r40.ew == pytest.approx(1.0, abs=1e-12)
        r60 = at(60.0)
        assert r60.mw == pytest.approx(0.4 / 0.6, abs=1e-12)
        assert r60.ew == pytest.approx(0.5, abs=1e-12)
        # linearity inside the (40, 60] segment: w = 0.25 at p=45
        r45 = at(45.0)
        assert r45.mw == pytest.approx(0.25 * (0.4 / 0.6) + 0.75 * 1.0, abs=1e-12)
        assert r45.ew == pytest.approx(0.25 * 0.5 + 0.75 * 1.0, abs=1e-12)

        bound = max(mapping[f] for f in candidates) * 1.0  # mass fraction x range
        n = 10_000
        for kind in ("top", "bottom"):
            prev_ew = prev_mw = None
            for i in range(1, n + 1):
                result = truncated_scores(
                    dist, lexicon, "plural", PercentileCutoff(kind, 100.0 * i / n))
                if prev_ew is not None and result.ew is not None:
                    assert abs(result.ew - prev_ew) <= bound
                if prev_mw is not None and result.mw is not None:
                    assert abs(result.mw - prev_mw) <= bound
                prev_ew = result.ew if result.ew is not None else prev_ew
                prev_mw = result.mw if result.mw is not None else prev_mw


def test_determinism_and_codec(tmp_path):
    """write->read->write byte identity; lexicon order never changes scores."""
    with criterion("determinism & codec round trip"):
        rng = random.Random(7)
        dists = []
        for i in range(20):
            _, _, mapping = random_case(rng)
            dists.append(synthetic_distribution(f"t{i}", mapping))
        first = tmp_path / "a.jsonl"
        second = tmp_path / "b.jsonl"
        write_dump(dists, first)
        write_dump(list(read_dump(first)), second)
        assert first.read_bytes() == second.read_bytes()

        # permuted lemma input files yield identical scores
        lemmas = ["be", "exist", "meet", "see", "try", "go", "walk", "mix"]
        forward = tmp_path / "fwd.txt"
        backward = tmp_path / "bwd.txt"
        forward.write_text("\n".join(lemmas) + "\n")
        backward.write_text("\n".join(reversed(lemmas)) + "\n")
        lex_fwd = load_lemma_list(forward, source_tag="t")
        lex_bwd = load_lemma_list(backward, source_tag="t")
        assert lex_fwd == lex_bwd
        for _ in range(50):
            lexicon, number, mapping = random_case(rng)
            shuffled_pairs = list(lexicon.pairs)
            rng.shuffle(shuffled_pairs)
            shuffled = Lexicon(tuple(shuffled_pairs), lexicon.source_tags)
            dist = synthetic_distribution("t", mapping)
            a = score_template(dist, lexicon, number)
            b = score_template(dist, shuffled, number)
            assert a.ew == b.ew
            assert a.mw == pytest.approx(b.mw, abs=1e-15)
            assert a.tse == b.tse


def test_exclusion_accounting(tmp_path):
    """Constructed zero-mass / no-eligible fixtures produce exact counts."""
    with criterion("exclusion accounting (n_excluded, invalid_proportion)"):
        config = RunConfig(
            templates=[str(FIXTURES / "exclusion_templates.jsonl")],
            backend={"kind": "synthetic",
                     "path": str(FIXTURES / "exclusion_synthetic.json")},
            lemmas=[str(FIXTURES / "exclusion_lemmas.txt")],
            output_dir=str(tmp_path / "ex-out"),
            figures=False,
        )
        report = run_score(config)
        row = report.row("ExTest")
        assert row.n_templates == 3
        assert row.n_excluded == 2
        assert dict(row.excluded_by_reason) == {
            EXCLUDED_NO_ELIGIBLE_LEMMAS: 1,
            EXCLUDED_ZERO_MASS: 1,
        }
        assert row.ew_mean == 1.0          # only ex-normal scored
        assert row.mw_mean == pytest.approx(0.45 / 0.75, abs=1e-12)

        sweep_config = RunConfig(
            templates=[str(FIXTURES / "exclusion_templates.jsonl")],
            backend={"kind": "synthetic",
                     "path": str(FIXTURES / "exclusion_synthetic.json")},
            lemmas=[str(FIXTURES / "exclusion_lemmas.txt")],
            output_dir=str(tmp_path / "ex-sweep"),
            top_grid=[100.0],
            bottom_grid=[50.0],
            figures=False,
        )
        rows = run_sweep(sweep_config)
        top_rows = [r for r in rows if r.kind == "top" and r.p == 100.0]
        assert top_rows, "missing top p=100 rows"
        for r in top_rows:
            # only the all-zero-probability template has an empty nucleus
            assert r.invalid_proportion == pytest.approx(1.0 / 3.0, abs=1e-15)
            assert r.n_templates == 3
            assert r.n_scored == 1
