"""Append-only crawl repository.

One JSON record per line in records.jsonl (human-inspectable), raw HTML
stored content-addressed under pages/, crawl metadata in meta.json, and the
crawl-order log beside them. The consistency checker re-derives every
stored link priority from the stored inputs, realizing the database-checker
role at desk scale.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

RECORDS_NAME = "records.jsonl"
META_NAME = "meta.json"
ORDER_LOG_NAME = "crawl_order.log"


@dataclass
class LinkRecord:
    url: str
    prefixes: list[str] | None
    on_topic: bool
    priority: float
    min_distance: int | None = None     # matched T-Graph distance (treasure)
    fallback_levels: int | None = None  # level count used for the no-match score


@dataclass
class CrawlRecord:
    url: str
    cycle: int
    fetched_at: float
    outcome_kind: str
    status: int = 0
    content_type: str = ""
    final_url: str = ""
    page_prefixes: list[str] | None = None
    page_on_topic: bool = False
    links: list[LinkRecord] = field(default_factory=list)
    raw_ref: str | None = None
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "CrawlRecord":
        data = json.loads(line)
        data["links"] = [LinkRecord(**l) for l in data.get("links", [])]
        return cls(**data)


class RepositoryError(Exception):
    pass


class Repository:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "pages").mkdir(exist_ok=True)
        self._records_path = self.root / RECORDS_NAME
        if not self._records_path.exists():
            self._records_path.touch()

    @property
    def records_path(self) -> Path:
        return self._records_path

    @property
    def order_log_path(self) -> Path:
        return self.root / ORDER_LOG_NAME

    def store_raw(self, body: bytes) -> str:
        digest = hashlib.sha256(body).hexdigest()[:16]
        ref = f"pages/{digest}.html"
        path = self.root / ref
        if not path.exists():
            path.write_bytes(body)
        return ref

    def store(self, record: CrawlRecord) -> None:
        with open(self._records_path, "a", encoding="utf-8") as f:
            f.write(record.to_json() + "\n")

    def count(self) -> int:
        with open(self._records_path, encoding="utf-8") as f:
            return sum(1 for _ in f)

    def records(self) -> list[CrawlRecord]:
        out = []
        with open(self._records_path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    out.append(CrawlRecord.from_json(line))
        return out

    def load_records(
        self,
        url: str | None = None,
        topic: str | None = None,
        since: float | None = None,
        until: float | None = None,
    ) -> list[CrawlRecord]:
        """Records filtered by exact URL, topic prefix, and/or fetch time."""
        matches = []
        for record in self.records():
            if url is not None and record.url != url:
                continue
            if topic is not None:
                prefixes = record.page_prefixes or []
                if not any(p.startswith(topic) for p in prefixes):
                    continue
            if since is not None and record.fetched_at < since:
                continue
            if until is not None and record.fetched_at > until:
                continue
            matches.append(record)
        return matches

    def truncate(self, record_count: int, order_log_lines: int | None = None) -> None:
        """Drop records (and order-log lines) past a checkpoint boundary."""
        lines = self._records_path.read_text(encoding="utf-8").splitlines(keepends=True)
        if len(lines) > record_count:
            self._records_path.write_text("".join(lines[:record_count]), encoding="utf-8")
        if order_log_lines is not None and self.order_log_path.exists():
            log_lines = self.order_log_path.read_text(encoding="utf-8").splitlines(keepends=True)
            if len(log_lines) > order_log_lines:
                self.order_log_path.write_text("".join(log_lines[:order_log_lines]), encoding="utf-8")

    def write_meta(self, meta: dict) -> None:
        (self.root / META_NAME).write_text(
            json.dumps(meta, sort_keys=True, indent=1), encoding="utf-8"
        )

    def read_meta(self) -> dict:
        path = self.root / META_NAME
        if not path.exists():
            return {}
        return json.loads(path.read_text(encoding="utf-8"))

    def check_consistency(self) -> list[str]:
        """Re-derive every stored link priority; return violation messages.

        Expected priorities per the stored inputs: off-topic links get the
        configured floor; on-topic links get 1/max(1, min stored distance)
        or the 1/(levels+1) fallback. Strategies that bypass the T-Graph
        (breadth_first, best_first_anchor_only) have their own fixed rules.
        """
        meta = self.read_meta()
        strategy = meta.get("strategy", "treasure")
        off_topic = meta.get("off_topic_priority", 0.01)
        violations = []
        for index, record in enumerate(self.records()):
            for link in record.links:
                expected = self._expected_priority(link, strategy, off_topic)
                if expected is None:
                    violations.append(
                        f"record {index} link {link.url}: underivable priority fields"
                    )
                elif link.priority != expected:
                    violations.append(
                        f"record {index} link {link.url}: stored {link.priority!r}"
                        f" != derived {expected!r}"
                    )
        return violations

    @staticmethod
    def _expected_priority(link: LinkRecord, strategy: str, off_topic: float) -> float | None:
        if strategy == "breadth_first":
            return 1.0
        if not link.on_topic:
            return off_topic
        if strategy == "best_first_anchor_only":
            return 1.0
        if link.min_distance is not None:
            return 1.0 / max(1, link.min_distance)
        if link.fallback_levels is not None:
            return 1.0 / (link.fallback_levels + 1)
        return None
