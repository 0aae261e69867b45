"""Roll-up of per-bug repair records into summary tables.

Records are the dicts written to results.jsonl by the repair driver:
each has at least ``bug_id`` and ``status`` and may carry ``cwe``,
``year``, ``wall_time_secs``, ``cost_usd``, ``rounds_used`` and
``attempts_used``.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

from ..patchlab import PatchStatus

PLAUSIBLE = PatchStatus.PLAUSIBLE.value

_STATUS_ORDER = [
    PatchStatus.PLAUSIBLE.value,
    PatchStatus.IMPLAUSIBLE.value,
    PatchStatus.COMPILE_ERROR.value,
    PatchStatus.NO_PATCH.value,
]


@dataclass
class RateRow:
    plausible: int
    total: int

    @property
    def rate(self) -> float:
        return self.plausible / self.total if self.total else 0.0


@dataclass
class SpreadRow:
    """Mean and median of one numeric column for one status bucket."""

    mean: float
    median: float
    count: int


@dataclass
class MetricReport:
    total: int = 0
    plausible: int = 0
    by_status: Dict[str, int] = field(default_factory=dict)
    by_cwe: Dict[str, RateRow] = field(default_factory=dict)
    by_year: Dict[str, RateRow] = field(default_factory=dict)
    time_by_status: Dict[str, SpreadRow] = field(default_factory=dict)
    cost_by_status: Dict[str, SpreadRow] = field(default_factory=dict)
    effort_histogram: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @property
    def fix_rate(self) -> float:
        return self.plausible / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "plausible": self.plausible,
            "fix_rate": self.fix_rate,
            "by_status": dict(self.by_status),
            "by_cwe": {
                key: {"plausible": row.plausible, "total": row.total, "rate": row.rate}
                for key, row in self.by_cwe.items()
            },
            "by_year": {
                key: {"plausible": row.plausible, "total": row.total, "rate": row.rate}
                for key, row in self.by_year.items()
            },
            "time_by_status": {
                key: {"mean": row.mean, "median": row.median, "count": row.count}
                for key, row in self.time_by_status.items()
            },
            "cost_by_status": {
                key: {"mean": row.mean, "median": row.median, "count": row.count}
                for key, row in self.cost_by_status.items()
            },
            "effort_histogram": {
                f"{rounds}x{attempts}": count
                for (rounds, attempts), count in sorted(self.effort_histogram.items())
            },
        }


def _rate_table(records: List[dict], key: str) -> Dict[str, RateRow]:
    table: Dict[str, RateRow] = {}
    for rec in records:
        value = rec.get(key)
        if value is None:
            continue
        bucket = str(value)
        row = table.setdefault(bucket, RateRow(0, 0))
        row.total += 1
        if rec.get("status") == PLAUSIBLE:
            row.plausible += 1
    return dict(sorted(table.items()))


def _spread_table(records: List[dict], column: str) -> Dict[str, SpreadRow]:
    buckets: Dict[str, List[float]] = {}
    for rec in records:
        value = rec.get(column)
        status = rec.get("status")
        if value is None or status is None:
            continue
        buckets.setdefault(status, []).append(float(value))
    out: Dict[str, SpreadRow] = {}
    for status in _STATUS_ORDER:
        values = buckets.get(status)
        if not values:
            continue
        out[status] = SpreadRow(
            mean=sum(values) / len(values),
            median=statistics.median(values),
            count=len(values),
        )
    for status, values in sorted(buckets.items()):
        if status not in out:
            out[status] = SpreadRow(
                mean=sum(values) / len(values),
                median=statistics.median(values),
                count=len(values),
            )
    return out


def aggregate(records: Iterable[dict]) -> MetricReport:
    """Summarize repair records: fix rates by CWE and by year, time and
    cost spreads per final status, and a rounds-by-attempts histogram of
    where plausible patches landed."""
    recs = list(records)
    report = MetricReport(total=len(recs))
    for rec in recs:
        status = rec.get("status", PatchStatus.NO_PATCH.value)
        report.by_status[status] = report.by_status.get(status, 0) + 1
        if status == PLAUSIBLE:
            report.plausible += 1
            rounds = rec.get("rounds_used")
            attempts = rec.get("attempts_used")
            if rounds is not None and attempts is not None:
                key = (int(rounds), int(attempts))
                report.effort_histogram[key] = report.effort_histogram.get(key, 0) + 1
    report.by_status = dict(sorted(report.by_status.items()))
    report.by_cwe = _rate_table(recs, "cwe")
    report.by_year = _rate_table(recs, "year")
    report.time_by_status = _spread_table(recs, "wall_time_secs")
    report.cost_by_status = _spread_table(recs, "cost_usd")
    return report


def _fmt_rate(row: RateRow) -> str:
    return f"{row.plausible}/{row.total} ({row.rate:.1%})"


def render_report(report: MetricReport) -> str:
    """Plain-text rendering with mean (median) spreads."""
    lines = [
        f"bugs: {report.total}",
        f"plausible: {report.plausible} ({report.fix_rate:.1%})",
    ]
    if report.by_status:
        lines.append("")
        lines.append("by status:")
        for status, count in report.by_status.items():
            lines.append(f"  {status}: {count}")
    if report.by_cwe:
        lines.append("")
        lines.append("fix rate by CWE:")
        for cwe, row in report.by_cwe.items():
            lines.append(f"  {cwe}: {_fmt_rate(row)}")
    if report.by_year:
        lines.append("")
        lines.append("fix rate by year:")
        for year, row in report.by_year.items():
            lines.append(f"  {year}: {_fmt_rate(row)}")
    if report.time_by_status:
        lines.append("")
        lines.append("wall time per bug, mean (median) seconds:")
        for status, row in report.time_by_status.items():
            lines.append(f"  {status}: {row.mean:.1f} ({row.median:.1f}) over {row.count}")
    if report.cost_by_status:
        lines.append("")
        lines.append("cost per bug, mean (median) USD:")
        for status, row in report.cost_by_status.items():
            lines.append(f"  {status}: {row.mean:.4f} ({row.median:.4f}) over {row.count}")
    if report.effort_histogram:
        lines.append("")
        lines.append("plausible patches by round x attempt:")
        for (rounds, attempts), count in sorted(report.effort_histogram.items()):
            lines.append(f"  round {rounds}, attempt {attempts}: {count}")
    return "\n".join(lines)


def load_records(path: str) -> List[dict]:
    """Read a results.jsonl file, one JSON object per line."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            records.append(json.loads(line))
    return records
