"""The crawl loop: dequeue, fetch, classify, score, store, repeat.

Single-threaded reference implementation of the pipeline contract: the
frontier and dedup set mutate serially, page processing is pure, fetched
outcomes pass through a bounded response buffer, and the repository accepts
appends with per-record atomicity. Corpus-mode crawls are bit-deterministic:
the logical clock is the cycle counter and the crawl-order log is
byte-identical across runs. Checkpoints persist the full frontier, dedup
set and cycle counter; resuming reproduces the exact continuation.
"""

from __future__ import annotations

import json
import logging
import os
import time
from collections import deque
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import tgraph as tgraph_mod
from .corpus import CorpusSnapshot
from .ddc import DdcLexicon, load_lexicon_path
from .fetch import ROBOTS_DENIED, SKIPPED, CorpusFetcher, FetchOutcome, LiveFetcher
from .frontier import Frontier
from .galaxy import TopicConfig, classify_link, classify_page, find_galaxy, is_on_topic, plot_dots
from .htmldoc import BoundaryWord, PageTooLarge, extract_page_elements, parse_html
from .repository import CrawlRecord, LinkRecord, Repository
from .robots import HostRulesCache, robots_allowed, urllib_robots_fetcher
from .tgraph import LinkContext, TGraph, priority_for_link
from .textproc import stem_text
from .urlnorm import canonicalize

logger = logging.getLogger(__name__)

STRATEGIES = ("treasure", "breadth_first", "best_first_anchor_only")

DEFAULT_USER_AGENT = "treasure-crawler/0.1 (+https://example.invalid/crawler-contact)"


class CrawlInitError(Exception):
    """Unrecoverable initialization failure: no crawl happens."""


class ConfigError(Exception):
    pass


@dataclass
class CrawlConfig:
    seeds: list[str] = field(default_factory=list)
    topics: list[str] = field(default_factory=list)
    tgraph_path: str = ""
    lexicon_path: str = ""
    adapter: str = "corpus"             # "corpus" | "live"
    corpus_path: str = ""
    delay_ms: int = 1000
    aging_delta: float = 0.001
    max_pages: int = 100
    size_cap: int = 2 * 1024 * 1024
    checkpoint_every: int = 50
    user_agent: str = DEFAULT_USER_AGENT
    off_topic_priority: float = 0.01
    refinement_depth: int = 3
    strategy: str = "treasure"
    output_dir: str = "crawl-out"
    checkpoint_path: str = ""           # default: <output_dir>/checkpoint.json
    response_buffer: int = 64
    robots_ttl: float = 3600.0

    def validate(self) -> None:
        if not self.seeds:
            raise ConfigError("at least one seed URL is required")
        if not self.topics:
            raise ConfigError("at least one topic prefix is required")
        if self.adapter not in ("corpus", "live"):
            raise ConfigError(f"unknown adapter {self.adapter!r}")
        if self.adapter == "corpus" and not self.corpus_path:
            raise ConfigError("corpus adapter needs corpus_path")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.aging_delta <= 0:
            raise ConfigError("aging_delta must be positive")
        if self.max_pages < 1:
            raise ConfigError("max_pages must be >= 1")
        if self.strategy == "treasure" and not self.tgraph_path:
            raise ConfigError("treasure strategy needs tgraph_path")

    def topic_config(self) -> TopicConfig:
        return TopicConfig(
            topics=set(self.topics),
            refinement_depth=self.refinement_depth,
            off_topic_priority=self.off_topic_priority,
        )

    def resolved_checkpoint_path(self) -> Path:
        if self.checkpoint_path:
            return Path(self.checkpoint_path)
        return Path(self.output_dir) / "checkpoint.json"


_LIST_KEYS = {"seeds", "topics"}
_INT_KEYS = {"delay_ms", "max_pages", "size_cap", "checkpoint_every",
             "refinement_depth", "response_buffer"}
_FLOAT_KEYS = {"aging_delta", "off_topic_priority", "robots_ttl"}


def load_config(path: str | Path) -> CrawlConfig:
    """Flat key-value config: `key = value` lines, '#' comments.

    List values (seeds, topics) are whitespace-separated. Unknown keys are
    errors, so typos fail loudly.
    """
    known = {f.name for f in fields(CrawlConfig)}
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in _LIST_KEYS:
            values[key] = value.split()
        elif key in _INT_KEYS:
            values[key] = int(value)
        elif key in _FLOAT_KEYS:
            values[key] = float(value)
        else:
            values[key] = value
    return CrawlConfig(**values)


def apply_overrides(config: CrawlConfig, overrides: dict) -> CrawlConfig:
    for key, value in overrides.items():
        if value is None:
            continue
        if not hasattr(config, key):
            raise ConfigError(f"unknown config key {key!r}")
        setattr(config, key, value)
    return config


@dataclass
class ProcessDeps:
    lexicon: DdcLexicon
    graph: TGraph | None
    topics: TopicConfig
    strategy: str = "treasure"
    size_cap: int = 2 * 1024 * 1024


def _score_link(link, deps: ProcessDeps) -> LinkRecord:
    """Predict the link's topic and assign its frontier priority."""
    if deps.strategy == "breadth_first":
        # FIFO discipline; priority carries no information
        prefixes = classify_link(link, deps.lexicon, deps.topics)
        on_topic = is_on_topic(prefixes, deps.topics)
        return LinkRecord(link.absolute_url, sorted(prefixes) if prefixes else None,
                          on_topic, 1.0)
    if deps.strategy == "best_first_anchor_only":
        # ablation: galaxy over the anchor text alone, no T-Graph
        boundary = [BoundaryWord(t, True) for t in stem_text(link.anchor_text)]
        result = find_galaxy(plot_dots(boundary, deps.lexicon), deps.topics.refinement_depth)
        prefixes = result.prefixes if result else None
        on_topic = is_on_topic(prefixes, deps.topics)
        priority = 1.0 if on_topic else deps.topics.off_topic_priority
        return LinkRecord(link.absolute_url, sorted(prefixes) if prefixes else None,
                          on_topic, priority)
    prefixes = classify_link(link, deps.lexicon, deps.topics)
    on_topic = is_on_topic(prefixes, deps.topics)
    if not on_topic:
        return LinkRecord(link.absolute_url, sorted(prefixes) if prefixes else None,
                          False, deps.topics.off_topic_priority)
    priority, min_distance = priority_for_link(deps.graph, LinkContext.from_link(link))
    return LinkRecord(
        link.absolute_url,
        sorted(prefixes) if prefixes else None,
        True,
        priority,
        min_distance=min_distance,
        fallback_levels=deps.graph.level_count if min_distance is None else None,
    )


def process_page(
    outcome: FetchOutcome,
    deps: ProcessDeps,
    cycle: int = 0,
    fetched_at: float = 0.0,
) -> tuple[CrawlRecord, list[tuple[str, float]], bytes | None]:
    """Relevance calculation for one fetch outcome.

    Returns the crawl record, the (url, priority) pairs for the frontier,
    and the raw bytes to store (None when there is nothing to keep).
    """
    record = CrawlRecord(
        url=outcome.url,
        cycle=cycle,
        fetched_at=fetched_at,
        outcome_kind=outcome.kind,
        status=outcome.status,
        content_type=outcome.content_type,
        final_url=outcome.final_url,
        detail=outcome.detail,
    )
    if not outcome.ok:
        return record, [], None
    if not outcome.is_html:
        return record, [], outcome.body
    try:
        tree = parse_html(outcome.body, size_cap=deps.size_cap)
    except PageTooLarge as exc:
        record.outcome_kind = SKIPPED
        record.detail = str(exc)
        return record, [], None
    page = extract_page_elements(tree, outcome.final_url or outcome.url)
    prefixes = classify_page(page, deps.lexicon, deps.topics)
    record.page_prefixes = sorted(prefixes) if prefixes else None
    record.page_on_topic = is_on_topic(prefixes, deps.topics)
    to_enqueue: list[tuple[str, float]] = []
    for link in page.links:
        link_record = _score_link(link, deps)
        record.links.append(link_record)
        to_enqueue.append((link_record.url, link_record.priority))
    return record, to_enqueue, outcome.body


@dataclass
class CrawlSummary:
    attempts: int = 0
    successes: int = 0
    http_errors: int = 0
    network_errors: int = 0
    robots_denied: int = 0
    skipped: int = 0
    on_topic_pages: int = 0
    links_enqueued: int = 0
    links_duplicate: int = 0
    cycles: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _write_checkpoint(path: Path, state: dict) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(state, sort_keys=True), encoding="utf-8")
    os.replace(tmp, path)


class Crawler:
    """One crawl run; construct, then loop() until budget or empty frontier."""

    def __init__(self, config: CrawlConfig, resume: bool = False):
        config.validate()
        self.config = config
        try:
            self.lexicon = load_lexicon_path(config.lexicon_path)
        except OSError as exc:
            raise CrawlInitError(f"cannot load lexicon: {exc}") from exc
        self.graph: TGraph | None = None
        if config.tgraph_path:
            try:
                self.graph = tgraph_mod.load(config.tgraph_path)
            except (OSError, tgraph_mod.TGraphError) as exc:
                raise CrawlInitError(f"cannot load T-Graph: {exc}") from exc
        if config.adapter == "corpus":
            try:
                snapshot = CorpusSnapshot.load(config.corpus_path)
            except Exception as exc:
                raise CrawlInitError(f"cannot load corpus: {exc}") from exc
            self.fetcher = CorpusFetcher(snapshot)
            self.robots: HostRulesCache | None = None
        else:
            self.fetcher = LiveFetcher(
                user_agent=config.user_agent,
                size_cap=config.size_cap,
                delay_ms=config.delay_ms,
            )
            self.robots = HostRulesCache(
                urllib_robots_fetcher(config.user_agent), ttl=config.robots_ttl
            )
        self.deps = ProcessDeps(
            lexicon=self.lexicon,
            graph=self.graph,
            topics=config.topic_config(),
            strategy=config.strategy,
            size_cap=config.size_cap,
        )
        self.repo = Repository(config.output_dir)
        self.summary = CrawlSummary()
        self.cycle = 0
        self._checkpoint_path = config.resolved_checkpoint_path()

        if resume:
            self._restore_checkpoint()
        else:
            self.frontier = Frontier(
                aging_delta=config.aging_delta,
                fifo=(config.strategy == "breadth_first"),
            )
            self.repo.truncate(0, 0)
            self.repo.write_meta({
                "strategy": config.strategy,
                "off_topic_priority": config.off_topic_priority,
                "topics": sorted(config.topics),
                "adapter": config.adapter,
                "tgraph_level_count": self.graph.level_count if self.graph else None,
            })
            for seed in config.seeds:
                canon = canonicalize(seed)
                if canon is None:
                    raise CrawlInitError(f"seed URL not acceptable: {seed!r}")
                self.frontier.enqueue(canon, 1.0, 0)

    def _restore_checkpoint(self) -> None:
        path = self._checkpoint_path
        if not path.exists():
            raise CrawlInitError(f"no checkpoint to resume from at {path}")
        state = json.loads(path.read_text(encoding="utf-8"))
        self.frontier = Frontier.restore(state["frontier"])
        self.cycle = state["cycle"]
        self.summary = CrawlSummary(**state["summary"])
        self.repo.truncate(state["record_count"], state["order_log_lines"])

    def _checkpoint(self) -> None:
        order_lines = 0
        if self.repo.order_log_path.exists():
            with open(self.repo.order_log_path, encoding="utf-8") as f:
                order_lines = sum(1 for _ in f)
        _write_checkpoint(self._checkpoint_path, {
            "version": 1,
            "cycle": self.cycle,
            "summary": self.summary.as_dict(),
            "frontier": self.frontier.snapshot(),
            "record_count": self.repo.count(),
            "order_log_lines": order_lines,
        })

    def _log_dequeue(self, item) -> None:
        with open(self.repo.order_log_path, "a", encoding="utf-8") as f:
            f.write(f"{self.cycle}\t{item.url}\t{item.base_priority!r}"
                    f"\t{item.effective_priority!r}\n")

    def loop(self) -> CrawlSummary:
        config = self.config
        buffer: deque[tuple[FetchOutcome, int, float]] = deque()
        while self.summary.attempts < config.max_pages:
            self.cycle += 1
            item = self.frontier.dequeue_highest(self.cycle)
            if item is None:
                break
            self._log_dequeue(item)
            self.summary.attempts += 1
            self.summary.cycles = self.cycle
            fetched_at = float(self.cycle) if config.adapter == "corpus" else time.time()

            if self.robots is not None and not robots_allowed(
                self.robots, item.url, config.user_agent
            ):
                outcome = FetchOutcome(item.url, ROBOTS_DENIED, detail="robots.txt")
            else:
                outcome = self.fetcher.fetch(item.url)

            buffer.append((outcome, self.cycle, fetched_at))
            if len(buffer) > config.response_buffer:
                logger.warning("response buffer overflow; processing eagerly")
            while buffer:
                self._process_one(*buffer.popleft())

            if self.summary.attempts % config.checkpoint_every == 0:
                self._checkpoint()
        self._checkpoint()
        return self.summary

    def _process_one(self, outcome: FetchOutcome, cycle: int, fetched_at: float) -> None:
        record, to_enqueue, raw = process_page(outcome, self.deps, cycle, fetched_at)
        if raw is not None:
            record.raw_ref = self.repo.store_raw(raw)
        self.repo.store(record)
        kind_counter = {
            "success": "successes",
            "http_error": "http_errors",
            "network_error": "network_errors",
            "robots_denied": "robots_denied",
            "skipped": "skipped",
        }.get(record.outcome_kind)
        if kind_counter:
            setattr(self.summary, kind_counter, getattr(self.summary, kind_counter) + 1)
        if record.page_on_topic:
            self.summary.on_topic_pages += 1
        for url, priority in to_enqueue:
            if self.frontier.enqueue(url, priority, cycle):
                self.summary.links_enqueued += 1
            else:
                self.summary.links_duplicate += 1


def run_crawl(config: CrawlConfig, resume: bool = False) -> CrawlSummary:
    """Seeds at highest priority, then dequeue/fetch/process/store until
    the page budget is spent or the frontier empties."""
    return Crawler(config, resume=resume).loop()
