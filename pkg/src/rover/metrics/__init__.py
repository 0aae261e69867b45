"""Patch-quality and fault-localization measurement."""

from .aggregate import MetricReport, aggregate, render_report  # noqa: F401
from .codebleu import CodeBleuScore, codebleu  # noqa: F401
from .sbfl import (  # noqa: F401
    CoverageMatrix,
    CoverageRun,
    load_coverage_dir,
    ochiai_rank,
)
from .stats import PointBiserialResult, point_biserial, t_cdf  # noqa: F401
