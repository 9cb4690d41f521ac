"""Harvest ratio, precision and recall over a crawl repository.

Relevance comes from a labels file (url<TAB>relevant|irrelevant). Recall is
measured against the labeled-relevant set only, mirroring evaluation against
a topically-known subset. The harvest curve samples the running ratio every
k fetched pages and always ends on the final ratio.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .repository import Repository
from .urlnorm import canonicalize

logger = logging.getLogger(__name__)


class LabelsError(Exception):
    pass


def load_labels(path: str | Path) -> dict[str, bool]:
    labels: dict[str, bool] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1] not in ("relevant", "irrelevant"):
            raise LabelsError(f"{path}:{lineno}: expected `url<TAB>relevant|irrelevant`")
        canon = canonicalize(parts[0])
        if canon is None:
            raise LabelsError(f"{path}:{lineno}: bad URL {parts[0]!r}")
        labels[canon] = parts[1] == "relevant"
    return labels


@dataclass
class MetricsReport:
    pages_fetched: int = 0
    relevant_fetched: int = 0
    stored_on_topic: int = 0
    relevant_on_topic: int = 0
    labeled_relevant: int = 0
    harvest_ratio: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    curve: list[tuple[int, float]] = field(default_factory=list)


def compute_metrics(
    repo: Repository, labels: dict[str, bool], curve_every: int = 1000
) -> MetricsReport:
    """Pure function of (repository, labels); recomputation agrees."""
    report = MetricsReport(labeled_relevant=sum(1 for v in labels.values() if v))
    for record in repo.records():
        if record.outcome_kind != "success":
            continue
        report.pages_fetched += 1
        relevant = labels.get(record.url, False)
        if relevant:
            report.relevant_fetched += 1
        if record.page_on_topic:
            report.stored_on_topic += 1
            if relevant:
                report.relevant_on_topic += 1
        if curve_every > 0 and report.pages_fetched % curve_every == 0:
            report.curve.append(
                (report.pages_fetched, report.relevant_fetched / report.pages_fetched)
            )
    if report.pages_fetched == 0:
        logger.warning("empty repository: all metrics are zero")
        return report
    report.harvest_ratio = report.relevant_fetched / report.pages_fetched
    if report.stored_on_topic:
        report.precision = report.relevant_on_topic / report.stored_on_topic
    if report.labeled_relevant:
        report.recall = report.relevant_fetched / report.labeled_relevant
    if not report.curve or report.curve[-1] != (report.pages_fetched, report.harvest_ratio):
        report.curve.append((report.pages_fetched, report.harvest_ratio))
    return report


_COLUMNS = (
    "strategy", "pages_fetched", "relevant_fetched", "harvest_ratio",
    "precision", "recall", "stored_on_topic", "labeled_relevant",
)


def report_table(reports: dict[str, MetricsReport]) -> str:
    """Human-readable side-by-side table."""
    rows = [_COLUMNS]
    for name, r in reports.items():
        rows.append((
            name, str(r.pages_fetched), str(r.relevant_fetched),
            f"{r.harvest_ratio:.4f}", f"{r.precision:.4f}", f"{r.recall:.4f}",
            str(r.stored_on_topic), str(r.labeled_relevant),
        ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(_COLUMNS))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)


def write_csv(path: str | Path, reports: dict[str, MetricsReport]) -> None:
    """Machine-readable companion to the table, plus curve points."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(_COLUMNS)
        for name, r in reports.items():
            writer.writerow((
                name, r.pages_fetched, r.relevant_fetched,
                f"{r.harvest_ratio:.6f}", f"{r.precision:.6f}", f"{r.recall:.6f}",
                r.stored_on_topic, r.labeled_relevant,
            ))
        writer.writerow(())
        writer.writerow(("strategy", "pages_fetched", "running_harvest_ratio"))
        for name, r in reports.items():
            for pages, ratio in r.curve:
                writer.writerow((name, pages, f"{ratio:.6f}"))
