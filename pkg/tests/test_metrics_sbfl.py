import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rover.errors import NoFailingRuns
from rover.metrics.sbfl import (
    CoverageMatrix,
    load_coverage_dir,
    ochiai_rank,
    ochiai_score,
    parse_coverage_lines,
    rank_of,
)


def brute_force_scores(matrix):
    """Independent Ochiai: recount everything straight from the runs."""
    lines = set()
    for run in matrix.runs:
        lines |= run.covered
    out = {}
    for line in lines:
        ef = sum(1 for r in matrix.runs if r.failing and line in r.covered)
        nf = sum(1 for r in matrix.runs if r.failing and line not in r.covered)
        ep = sum(1 for r in matrix.runs if not r.failing and line in r.covered)
        denom = math.sqrt((ef + nf) * (ef + ep))
        out[line] = 0.0 if denom == 0 else ef / denom
    return out


def random_matrix(rng, n_lines=6, n_runs=8):
    lines = [("f.c", i + 1) for i in range(n_lines)]
    matrix = CoverageMatrix()
    for j in range(n_runs):
        covered = {ln for ln in lines if rng.random() < 0.5}
        matrix.add_run(covered, failing=rng.random() < 0.4, name=f"r{j}")
    if not any(r.failing for r in matrix.runs):
        matrix.add_run({lines[0]}, failing=True, name="forced")
    return matrix


def test_pinned_value():
    # ef=3, nf=1, ep=2: 3 / sqrt(4 * 5)
    assert ochiai_score(3, 2, 1) == pytest.approx(3 / math.sqrt(20), abs=1e-12)
    assert ochiai_score(3, 2, 1) == pytest.approx(0.6708203932, abs=1e-9)


def test_zero_denominator_is_zero():
    assert ochiai_score(0, 0, 5) == 0.0


def test_matches_brute_force_on_random_matrices():
    rng = random.Random(1234)
    for _ in range(200):
        matrix = random_matrix(rng)
        want = brute_force_scores(matrix)
        got = dict(ochiai_rank(matrix))
        assert set(got) == set(want)
        for line, score in want.items():
            assert got[line] == pytest.approx(score, abs=1e-12)


def test_ranking_sorted_desc_ties_lexicographic():
    matrix = CoverageMatrix()
    # two lines always covered by the failing run: identical scores
    matrix.add_run({("b.c", 2), ("a.c", 9), ("a.c", 1)}, failing=True)
    matrix.add_run({("a.c", 9)}, failing=False)
    ranking = ochiai_rank(matrix)
    scores = [s for _, s in ranking]
    assert scores == sorted(scores, reverse=True)
    assert ranking[0][0] == ("a.c", 1)  # tie with ("b.c", 2) breaks on file
    assert ranking[1][0] == ("b.c", 2)


def test_no_failing_runs_raises():
    matrix = CoverageMatrix()
    matrix.add_run({("a.c", 1)}, failing=False)
    with pytest.raises(NoFailingRuns):
        ochiai_rank(matrix)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10), st.integers(0, 10), st.integers(0, 10))
def test_score_bounds(ef, ep, nf):
    score = ochiai_score(ef, ep, nf)
    assert 0.0 <= score <= 1.0


def test_rank_of():
    matrix = CoverageMatrix()
    matrix.add_run({("a.c", 1), ("a.c", 2)}, failing=True)
    matrix.add_run({("a.c", 2)}, failing=False)
    ranking = ochiai_rank(matrix)
    assert rank_of(ranking, ("a.c", 1)) == 1
    assert rank_of(ranking, ("nope.c", 5)) == 0


def test_parse_coverage_lines():
    got = parse_coverage_lines("src/a.c:10\n# hi\n\nsrc/b.c:2\nbadline\n")
    assert got == [("src/a.c", 10), ("src/b.c", 2)]


def test_load_coverage_dir(tmp_path):
    (tmp_path / "run1.fail").write_text("a.c:1\na.c:2\n")
    (tmp_path / "run2.pass").write_text("a.c:2\n")
    matrix = load_coverage_dir(str(tmp_path))
    assert len(matrix.runs) == 2
    failing = [r for r in matrix.runs if r.failing]
    assert len(failing) == 1 and failing[0].name == "run1.fail"
    ranking = ochiai_rank(matrix)
    assert ranking[0][0] == ("a.c", 1)
