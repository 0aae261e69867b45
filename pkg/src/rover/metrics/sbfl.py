"""Spectrum-based fault localization over per-run line coverage.

A coverage matrix records, for every program run, the set of source lines
the run executed and whether the run failed.  ``ochiai_rank`` turns that
matrix into a suspiciousness ranking: lines that appear in many failing
runs and few passing runs float to the top.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from ..errors import NoFailingRuns

Line = Tuple[str, int]


@dataclass
class CoverageRun:
    """One execution: the lines it covered and whether it failed."""

    covered: frozenset
    failing: bool
    name: str = ""


@dataclass
class CoverageMatrix:
    runs: List[CoverageRun] = field(default_factory=list)

    def add_run(self, covered: Iterable[Line], failing: bool, name: str = "") -> None:
        self.runs.append(CoverageRun(frozenset(covered), failing, name))

    @property
    def lines(self) -> List[Line]:
        """Every line covered by at least one run, sorted."""
        seen = set()
        for run in self.runs:
            seen.update(run.covered)
        return sorted(seen)

    def counts(self, line: Line) -> Tuple[int, int, int, int]:
        """Return (ef, ep, nf, np) for one line."""
        ef = ep = nf = np_ = 0
        for run in self.runs:
            hit = line in run.covered
            if run.failing:
                if hit:
                    ef += 1
                else:
                    nf += 1
            else:
                if hit:
                    ep += 1
                else:
                    np_ += 1
        return ef, ep, nf, np_


def parse_coverage_lines(text: str) -> List[Line]:
    """Parse ``<file>:<line>`` rows, one per line; blanks and # comments skipped."""
    out: List[Line] = []
    for raw in text.splitlines():
        row = raw.strip()
        if not row or row.startswith("#"):
            continue
        path, _, lineno = row.rpartition(":")
        if not path:
            continue
        try:
            out.append((path, int(lineno)))
        except ValueError:
            continue
    return out


def load_coverage_dir(path: str) -> CoverageMatrix:
    """Load a directory of coverage files into a matrix.

    Each file is one run; a ``.fail`` suffix (before the extension or as
    the extension itself) marks the run as failing, anything else passes.
    """
    matrix = CoverageMatrix()
    for name in sorted(os.listdir(path)):
        full = os.path.join(path, name)
        if not os.path.isfile(full):
            continue
        with open(full, "r", encoding="utf-8", errors="replace") as fh:
            covered = parse_coverage_lines(fh.read())
        failing = ".fail" in name.lower()
        matrix.add_run(covered, failing, name=name)
    return matrix


def ochiai_score(ef: int, ep: int, nf: int) -> float:
    """Ochiai suspiciousness: ef / sqrt((ef + nf) * (ef + ep))."""
    denom = math.sqrt((ef + nf) * (ef + ep))
    if denom == 0.0:
        return 0.0
    return ef / denom


def ochiai_rank(matrix: CoverageMatrix) -> List[Tuple[Line, float]]:
    """Rank covered lines by Ochiai score, highest first.

    Ties break lexicographically on (file, line) so the ranking is
    deterministic.  Raises ``NoFailingRuns`` when the matrix has no
    failing run, since every score would be vacuously zero.
    """
    if not any(run.failing for run in matrix.runs):
        raise NoFailingRuns("coverage matrix contains no failing run")
    scored = []
    for line in matrix.lines:
        ef, ep, nf, _ = matrix.counts(line)
        scored.append((line, ochiai_score(ef, ep, nf)))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored


def rank_of(ranking: Sequence[Tuple[Line, float]], line: Line) -> int:
    """1-based position of a line in a ranking; 0 when absent."""
    for pos, (candidate, _) in enumerate(ranking, start=1):
        if candidate == line:
            return pos
    return 0


def render_ranking(ranking: Sequence[Tuple[Line, float]], top: int = 0) -> str:
    rows = ranking[:top] if top else ranking
    out = []
    for pos, ((path, lineno), score) in enumerate(rows, start=1):
        out.append(f"{pos:4d}  {score:.4f}  {path}:{lineno}")
    return "\n".join(out)


def suspiciousness_by_line(matrix: CoverageMatrix) -> Dict[Line, float]:
    return dict(ochiai_rank(matrix))
