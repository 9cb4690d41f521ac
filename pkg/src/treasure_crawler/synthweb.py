"""Seeded synthetic web generator for desk-scale crawl experiments.

Lays out an off-topic region, an off-topic bridge path, and a planted
relevant cluster whose vocabulary maps to the configured Dewey prefixes
through the seed lexicon. The link paragraphs leading across the bridge
carry topical anchor text, so a crawler that reads link context can tunnel
to the cluster while a breadth-first crawler drowns in the off-topic
region. Identical parameters and seed produce byte-identical snapshots.

Emitted next to the snapshot: labels.tsv (relevant/irrelevant per URL), a
sample_manifest.tsv restricted to a cluster sample for T-Graph
construction, and targets.txt naming the target documents.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import CorpusSnapshot, write_snapshot
from .ddc import seed_lexicon_path

logger = logging.getLogger(__name__)

BASE_URL = "http://synthetic.test"

# function words never present in the lexicon
_FILLER = (
    "the of and to a in that it with as for was on are this be at by an "
    "from or had not but what all were when we there can out other which "
    "then them these so some her would make like him into time has look "
    "two more write go see number no way could people my than first been "
    "call who oil its now find long down day did get come made may part"
).split()


@dataclass
class SynthParams:
    pages: int = 500
    cluster: int = 100
    bridge: int = 3
    topics: tuple[str, ...] = ("294", "296", "297", "299")
    seed: int = 0
    sample: int = 20
    targets: int = 5

    def validate(self) -> None:
        off = self.pages - self.cluster - self.bridge
        if self.pages < 1 or self.cluster < 1 or self.bridge < 0:
            raise ValueError("page counts must be positive (bridge may be 0)")
        if off < 1:
            raise ValueError("cluster plus bridge must leave at least one other page")
        if not self.topics:
            raise ValueError("at least one topic prefix required")
        if not 1 <= self.targets <= self.sample <= self.cluster:
            raise ValueError("need 1 <= targets <= sample <= cluster")


@dataclass
class GeneratedCorpus:
    root: Path
    snapshot: CorpusSnapshot
    labels_path: Path
    sample_manifest_path: Path
    targets_path: Path
    seed_url: str


def _raw_vocab(lexicon_path: Path) -> list[tuple[str, list[str]]]:
    """(raw term, codes) pairs straight from the lexicon file, unstemmed."""
    vocab: dict[str, list[str]] = {}
    for line in lexicon_path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            continue
        code, term = parts
        vocab.setdefault(term, []).append(code)
    return sorted(vocab.items())


def _split_vocab(
    vocab: list[tuple[str, list[str]]], topics: tuple[str, ...]
) -> tuple[list[str], list[str]]:
    """Topic terms (some code under a topic prefix) vs safely-off terms
    (no code sharing a first digit with any topic)."""
    topic_digits = {t[0] for t in topics}
    on, off = [], []
    for term, codes in vocab:
        if any(code.startswith(t) for code in codes for t in topics):
            on.append(term)
        elif all(code[0] not in topic_digits for code in codes):
            off.append(term)
    if not on:
        raise ValueError(f"lexicon has no terms under topic prefixes {topics}")
    return on, off


def _page(
    title: str,
    section: str,
    subheading: str,
    link_sentence_words: list[str],
    links: list[tuple[str, str]],
    body_words: list[str],
) -> bytes:
    anchors = " ".join(f'<a href="{href}">{text}</a>' for href, text in links)
    html = (
        "<html><head><title>{title}</title></head><body>\n"
        "<h1>{title}</h1>\n"
        "<h2>{section}</h2>\n"
        "<p>{body1}</p>\n"
        "<h3>{subheading}</h3>\n"
        "<p>{linkwords} {anchors}</p>\n"
        "<p>{body2}</p>\n"
        "</body></html>\n"
    ).format(
        title=title,
        section=section,
        subheading=subheading,
        body1=" ".join(body_words[: len(body_words) // 2]),
        linkwords=" ".join(link_sentence_words),
        anchors=anchors,
        body2=" ".join(body_words[len(body_words) // 2 :]),
    )
    return html.encode("utf-8")


def generate_corpus(
    out_dir: str | Path,
    params: SynthParams,
    lexicon_path: str | Path | None = None,
) -> GeneratedCorpus:
    params.validate()
    rng = random.Random(params.seed)
    vocab = _raw_vocab(Path(lexicon_path) if lexicon_path else seed_lexicon_path())
    topic_terms, off_terms = _split_vocab(vocab, params.topics)

    n_off = params.pages - params.cluster - params.bridge
    off_urls = [f"{BASE_URL}/off/p{i}.html" for i in range(n_off)]
    bridge_urls = [f"{BASE_URL}/bridge/b{i}.html" for i in range(params.bridge)]
    cluster_urls = [f"{BASE_URL}/cluster/c{i}.html" for i in range(params.cluster)]

    def words(pool: list[str], n: int) -> list[str]:
        picked = [rng.choice(pool) for _ in range(n)]
        filler = [rng.choice(_FILLER) for _ in range(max(2, n // 3))]
        mixed = picked + filler
        rng.shuffle(mixed)
        return mixed

    def off_words(n: int) -> list[str]:
        return words(off_terms, n)

    def topic_words(n: int) -> list[str]:
        return words(topic_terms, n)

    pages: dict[str, tuple[bytes, int, str]] = {}

    # bridge entry: hung off an early off-topic page so every strategy
    # discovers it; only context-reading strategies cross it quickly
    bridge_host_index = 1 if n_off > 1 else 0
    tunnel_chain = bridge_urls + [cluster_urls[0]]

    for i, url in enumerate(off_urls):
        outdeg = rng.randint(4, 7)
        choices = [j for j in range(n_off) if j != i]
        neighbor_ids = sorted(rng.sample(choices, min(outdeg, len(choices))))
        if i == 0 and n_off > 1:
            neighbor_ids = sorted(set(neighbor_ids) | set(range(1, min(6, n_off))))
        links = [(off_urls[j], " ".join(off_words(2))) for j in neighbor_ids]
        link_sentence = off_words(8)
        if i == bridge_host_index:
            links.append((tunnel_chain[0], " ".join(topic_words(3))))
            link_sentence = link_sentence + topic_words(6)
        pages[url] = (
            _page(
                title=" ".join(off_words(3)),
                section=" ".join(off_words(2)),
                subheading=" ".join(off_words(2)),
                link_sentence_words=link_sentence,
                links=links,
                body_words=off_words(30),
            ),
            200,
            "text/html",
        )

    for i, url in enumerate(bridge_urls):
        # off-topic page overall, but the onward link sits in topical context
        pages[url] = (
            _page(
                title=" ".join(off_words(3)),
                section=" ".join(off_words(2)),
                subheading=" ".join(topic_words(2)),
                link_sentence_words=topic_words(8),
                links=[(tunnel_chain[i + 1], " ".join(topic_words(3)))],
                body_words=off_words(24),
            ),
            200,
            "text/html",
        )

    n_cluster = params.cluster
    for i, url in enumerate(cluster_urls):
        neighbor_ids = {(i + 1) % n_cluster, (i + 3) % n_cluster, (i + 8) % n_cluster}
        neighbor_ids |= {rng.randrange(n_cluster) for _ in range(2)}
        neighbor_ids.discard(i)
        links = [(cluster_urls[j], " ".join(topic_words(2))) for j in sorted(neighbor_ids)]
        if i % 10 == 9:
            links.append((off_urls[rng.randrange(n_off)], " ".join(off_words(2))))
        pages[url] = (
            _page(
                title=" ".join(topic_words(3)),
                section=" ".join(topic_words(2)),
                subheading=" ".join(topic_words(2)),
                link_sentence_words=topic_words(10),
                links=links,
                body_words=topic_words(30),
            ),
            200,
            "text/html",
        )

    out_dir = Path(out_dir)
    snapshot = write_snapshot(out_dir, pages)

    labels_path = out_dir / "labels.tsv"
    labeled = [(url, url in set(cluster_urls)) for url in sorted(pages)]
    labels_path.write_text(
        "\n".join(f"{url}\t{'relevant' if rel else 'irrelevant'}" for url, rel in labeled)
        + "\n",
        encoding="utf-8",
    )

    # sample manifest: a cluster prefix reusing the snapshot's page files
    sample_urls = cluster_urls[: params.sample]
    sample_lines = ["# url\tpath\tstatus\tcontent-type"]
    for url in sample_urls:
        entry = snapshot.get(url)
        sample_lines.append(f"{entry.url}\t{entry.path}\t{entry.status}\t{entry.content_type}")
    sample_manifest_path = out_dir / "sample_manifest.tsv"
    sample_manifest_path.write_text("\n".join(sample_lines) + "\n", encoding="utf-8")

    target_urls = sample_urls[-params.targets :]
    targets_path = out_dir / "targets.txt"
    targets_path.write_text("\n".join(target_urls) + "\n", encoding="utf-8")

    return GeneratedCorpus(
        root=out_dir,
        snapshot=snapshot,
        labels_path=labels_path,
        sample_manifest_path=sample_manifest_path,
        targets_path=targets_path,
        seed_url=off_urls[0],
    )
