"""Command-line entry point.

Subcommands: build-tgraph, gen-corpus, crawl, metrics, compare. Flags
mirror the crawl config keys and override file values. Exit status is 0 on
success, nonzero with a diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import tgraph as tgraph_mod
from .corpus import CorpusSnapshot
from .ddc import seed_lexicon_path
from .engine import (
    STRATEGIES,
    ConfigError,
    CrawlConfig,
    CrawlInitError,
    apply_overrides,
    load_config,
    run_crawl,
)
from .metrics import compute_metrics, load_labels, report_table, write_csv
from .repository import Repository
from .synthweb import SynthParams, generate_corpus


class CliError(Exception):
    pass


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seeds", nargs="+", help="seed URLs")
    parser.add_argument("--topics", nargs="+", help="topic Dewey prefixes")
    parser.add_argument("--tgraph-path", dest="tgraph_path")
    parser.add_argument("--lexicon-path", dest="lexicon_path")
    parser.add_argument("--adapter", choices=("corpus", "live"))
    parser.add_argument("--corpus-path", dest="corpus_path")
    parser.add_argument("--delay-ms", dest="delay_ms", type=int)
    parser.add_argument("--aging-delta", dest="aging_delta", type=float)
    parser.add_argument("--max-pages", dest="max_pages", type=int)
    parser.add_argument("--size-cap", dest="size_cap", type=int)
    parser.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    parser.add_argument("--user-agent", dest="user_agent")
    parser.add_argument("--off-topic-priority", dest="off_topic_priority", type=float)
    parser.add_argument("--strategy", choices=STRATEGIES)
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--checkpoint-path", dest="checkpoint_path")


def _config_from_args(args: argparse.Namespace) -> CrawlConfig:
    config = load_config(args.config) if args.config else CrawlConfig()
    overrides = {
        key: getattr(args, key, None)
        for key in (
            "seeds", "topics", "tgraph_path", "lexicon_path", "adapter",
            "corpus_path", "delay_ms", "aging_delta", "max_pages", "size_cap",
            "checkpoint_every", "user_agent", "off_topic_priority", "strategy",
            "output_dir", "checkpoint_path",
        )
    }
    apply_overrides(config, overrides)
    if not config.lexicon_path:
        config.lexicon_path = str(seed_lexicon_path())
    return config


def _cmd_build_tgraph(args: argparse.Namespace) -> int:
    sample = Path(args.sample_corpus)
    if sample.is_file():
        # a manifest file selects a sub-sample within its snapshot directory
        snapshot = CorpusSnapshot.load(sample.parent, manifest_name=sample.name)
    else:
        snapshot = CorpusSnapshot.load(sample, manifest_name=args.manifest_name or "manifest.tsv")
    targets = [
        line.strip()
        for line in Path(args.targets).read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    ]
    graph = tgraph_mod.build_from_corpus(snapshot.pages(), targets)
    tgraph_mod.save(graph, args.output)
    print(f"T-Graph: {len(graph.nodes)} nodes, {graph.level_count} levels -> {args.output}")
    return 0


def _cmd_gen_corpus(args: argparse.Namespace) -> int:
    params = SynthParams(
        pages=args.pages,
        cluster=args.cluster,
        bridge=args.bridge,
        topics=tuple(args.topics),
        seed=args.seed,
        sample=args.sample,
        targets=args.targets,
    )
    generated = generate_corpus(args.output, params, lexicon_path=args.lexicon_path)
    print(f"snapshot: {len(generated.snapshot)} pages under {generated.root}")
    print(f"labels:   {generated.labels_path}")
    print(f"sample:   {generated.sample_manifest_path}")
    print(f"targets:  {generated.targets_path}")
    print(f"seed URL: {generated.seed_url}")
    return 0


def _cmd_crawl(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    summary = run_crawl(config, resume=args.resume)
    for key, value in summary.as_dict().items():
        print(f"{key}: {value}")
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    repo = Repository(args.repository)
    labels = load_labels(args.labels)
    report = compute_metrics(repo, labels, curve_every=args.curve_every)
    reports = {args.name: report}
    print(report_table(reports))
    csv_path = Path(args.csv) if args.csv else Path(args.repository) / "metrics.csv"
    write_csv(csv_path, reports)
    print(f"csv: {csv_path}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.adapter != "corpus":
        raise CliError("compare requires the corpus adapter (a frozen snapshot)")
    labels = load_labels(args.labels)
    base_output = Path(config.output_dir)
    reports = {}
    for strategy in dict.fromkeys(args.strategies):
        if strategy not in STRATEGIES:
            raise CliError(f"unknown strategy {strategy!r}")
        run_config = _config_from_args(args)
        run_config.strategy = strategy
        run_config.output_dir = str(base_output / strategy)
        run_config.checkpoint_path = ""
        run_crawl(run_config)
        reports[strategy] = compute_metrics(
            Repository(run_config.output_dir), labels, curve_every=args.curve_every
        )
    print(report_table(reports))
    csv_path = Path(args.csv) if args.csv else base_output / "compare.csv"
    write_csv(csv_path, reports)
    print(f"csv: {csv_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treasure-crawler",
        description="Focused crawler: Dewey galaxy topic prediction + T-Graph priorities",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-tgraph", help="build and serialize a T-Graph from a sample corpus")
    p.add_argument("sample_corpus", help="snapshot directory (or one with a sample manifest)")
    p.add_argument("targets", help="file listing target URLs, one per line")
    p.add_argument("output", help="output path for the serialized graph")
    p.add_argument("--manifest-name", default=None,
                   help="alternate manifest file name inside the snapshot dir")
    p.set_defaults(func=_cmd_build_tgraph)

    p = sub.add_parser("gen-corpus", help="generate a deterministic synthetic snapshot")
    p.add_argument("output")
    p.add_argument("--pages", type=int, default=500)
    p.add_argument("--cluster", type=int, default=100)
    p.add_argument("--bridge", type=int, default=3)
    p.add_argument("--topics", nargs="+", default=["294", "296", "297", "299"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample", type=int, default=20)
    p.add_argument("--targets", type=int, default=5)
    p.add_argument("--lexicon-path", dest="lexicon_path")
    p.set_defaults(func=_cmd_gen_corpus)

    p = sub.add_parser("crawl", help="run a crawl (corpus or live adapter)")
    _add_config_flags(p)
    p.add_argument("--resume", action="store_true", help="continue from the checkpoint")
    p.set_defaults(func=_cmd_crawl)

    p = sub.add_parser("metrics", help="harvest/precision/recall of a repository")
    p.add_argument("repository")
    p.add_argument("labels")
    p.add_argument("--curve-every", type=int, default=1000)
    p.add_argument("--name", default="crawl")
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("compare", help="run strategies on one snapshot and compare")
    _add_config_flags(p)
    p.add_argument("labels")
    p.add_argument("--strategies", nargs="+", default=["treasure", "breadth_first"])
    p.add_argument("--curve-every", type=int, default=1000)
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (CliError, ConfigError, CrawlInitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surfaced verbatim with nonzero status
        print(f"error: {exc}", file=sys.stderr)
        if args.verbose:
            raise
        return 1


if __name__ == "__main__":
    sys.exit(main())
