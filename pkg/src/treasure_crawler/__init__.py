"""Focused web crawler with Dewey-Decimal galaxy topic prediction and
T-Graph link-distance frontier prioritization."""

from .ddc import DdcLexicon, DNumber, load_lexicon, load_lexicon_path, seed_lexicon_path
from .engine import CrawlConfig, CrawlSummary, load_config, process_page, run_crawl
from .fetch import CorpusFetcher, FetchOutcome, LiveFetcher
from .frontier import Frontier, FrontierItem
from .galaxy import (
    ANCHOR_IMPACT,
    Dot,
    GalaxyResult,
    TopicConfig,
    classify_link,
    classify_page,
    find_galaxy,
    is_on_topic,
    plot_dots,
    region_weight,
)
from .htmldoc import (
    BoundaryWord,
    PageElements,
    PageTooLarge,
    TagTree,
    UnvisitedLink,
    extract_page_elements,
    parse_html,
    topical_boundary,
)
from .metrics import MetricsReport, compute_metrics, load_labels
from .porter import stem
from .repository import CrawlRecord, LinkRecord, Repository
from .robots import HostRulesCache, parse_robots, robots_allowed
from .synthweb import SynthParams, generate_corpus
from .tgraph import (
    LinkContext,
    TGraph,
    TGraphNode,
    build_from_corpus,
    matching_nodes,
    node_similarity,
    osm,
    priority_for_link,
    watchdog_rescore,
)
from .textproc import (
    TermFrequencyVector,
    TokenSequence,
    build_tf_vector,
    cosine,
    phrase_candidates,
    stem_text,
    tokenize,
)
from .urlnorm import canonicalize, resolve_url

__version__ = "0.1.0"
