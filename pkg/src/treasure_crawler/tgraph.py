"""The T-Graph: leveled five-part nodes guiding frontier priorities.

Each node holds term-frequency vectors for its page's immediate subsection
heading (ISH), section heading (SH), main heading (MH) and the text around
its links (DC), plus the link distance to the nearest target document (DIC).
A link's context is cosine-compared against every node; nodes whose mean
similarity (OSM) reaches the threshold vote with their link distance, and
the priority is the inverse of the smallest distance.

Construction is two-stage: one node per link-bearing paragraph/list with
edges to the nodes of the linked pages, then shortest hop counts to the
target level become distances and levels. Edges only ever point to strictly
lower levels; an edge that does not is dropped after leveling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

from .htmldoc import UnvisitedLink, extract_page_elements, parse_html
from .textproc import TermFrequencyVector, build_tf_vector, cosine, stem_text
from .urlnorm import canonicalize

DEFAULT_OSM_THRESHOLD = 0.05

_FORMAT = "treasure-tgraph"
_VERSION = 1


class TGraphError(Exception):
    pass


class TGraphBuildError(TGraphError):
    pass


class TGraphFormatError(TGraphError):
    pass


@dataclass
class TGraphNode:
    id: str
    level: int
    ish_vec: TermFrequencyVector
    sh_vec: TermFrequencyVector
    mh_vec: TermFrequencyVector
    dc_vec: TermFrequencyVector
    dic_link_distance: int
    is_target: bool
    child_ids: list[str] = field(default_factory=list)
    source_url: str = ""
    block_index: int = -1      # -1 for target nodes
    unreachable: bool = False


@dataclass
class LinkContext:
    """The four texts of an unvisited link that nodes are compared against."""

    u_terms: list[str]
    sh_terms: list[str]
    mh_terms: list[str]
    boundary_terms: list[str]

    @classmethod
    def from_link(cls, link: UnvisitedLink) -> "LinkContext":
        return cls(
            u_terms=stem_text(link.subheading_u),
            sh_terms=stem_text(link.section_heading),
            mh_terms=stem_text(link.main_heading),
            boundary_terms=[w.term for w in link.boundary],
        )


class NodeSimilarity(NamedTuple):
    ish: float
    sh: float
    mh: float
    dc: float


class TGraph:
    def __init__(
        self,
        nodes: dict[str, TGraphNode],
        level_count: int,
        osm_threshold: float = DEFAULT_OSM_THRESHOLD,
    ):
        self.nodes = nodes
        self.level_count = level_count
        self.osm_threshold = osm_threshold

    def validate(self) -> None:
        """Raise TGraphFormatError when a structural invariant is broken."""
        if not self.nodes:
            raise TGraphFormatError("graph has no nodes")
        if not any(n.is_target for n in self.nodes.values()):
            raise TGraphFormatError("graph has no target node")
        max_level = max(n.level for n in self.nodes.values())
        if self.level_count != max_level + 1:
            raise TGraphFormatError(
                f"level_count {self.level_count} != 1 + max level {max_level}"
            )
        for node in self.nodes.values():
            if node.is_target != (node.level == 0) or node.is_target != (
                node.dic_link_distance == 0
            ):
                raise TGraphFormatError(
                    f"node {node.id}: target/level/distance flags disagree"
                )
            for child_id in node.child_ids:
                child = self.nodes.get(child_id)
                if child is None:
                    raise TGraphFormatError(f"node {node.id}: missing child {child_id}")
                if child.level >= node.level:
                    raise TGraphFormatError(
                        f"edge {node.id} -> {child_id} does not point downward"
                    )


def _vector_of(text: str) -> TermFrequencyVector:
    return build_tf_vector(stem_text(text))


def build_from_corpus(
    pages: Mapping[str, bytes],
    targets: Iterable[str],
    osm_threshold: float = DEFAULT_OSM_THRESHOLD,
) -> TGraph:
    """Two-stage construction from an interlinked page sample.

    ``pages`` maps canonical URL to raw HTML; ``targets`` marks the target
    documents (level 0). One node is made per link-bearing paragraph or
    list of a non-target page; target pages become single level-0 nodes.
    """
    page_map = {}
    for url, raw in pages.items():
        canon = canonicalize(url)
        if canon is None:
            raise TGraphBuildError(f"sample page URL not canonicalizable: {url!r}")
        page_map[canon] = raw
    target_set = set()
    for url in targets:
        canon = canonicalize(url)
        if canon is None or canon not in page_map:
            raise TGraphBuildError(f"target {url!r} is not in the sample set")
        target_set.add(canon)
    if not target_set:
        raise TGraphBuildError("no target documents given")

    nodes: dict[str, TGraphNode] = {}
    page_nodes: dict[str, list[str]] = {}
    pending_children: dict[str, list[str]] = {}

    for url in sorted(page_map):
        elements = extract_page_elements(parse_html(page_map[url]), url)
        if url in target_set:
            node = TGraphNode(
                id=url,
                level=0,
                ish_vec=TermFrequencyVector(),
                sh_vec=TermFrequencyVector(),
                mh_vec=_vector_of(elements.main_heading),
                dc_vec=build_tf_vector(elements.body_terms),
                dic_link_distance=0,
                is_target=True,
                source_url=url,
                block_index=-1,
            )
            nodes[node.id] = node
            page_nodes[url] = [node.id]
            continue
        ids: list[str] = []
        for block in elements.link_blocks:
            dc = _vector_of(block.text)
            if not dc:
                continue  # a node exists only because link text exists
            node = TGraphNode(
                id=f"{url}#b{block.index}",
                level=0,
                ish_vec=_vector_of(block.subheading_u),
                sh_vec=_vector_of(block.section_heading),
                mh_vec=_vector_of(block.main_heading),
                dc_vec=dc,
                dic_link_distance=0,
                is_target=False,
                source_url=url,
                block_index=block.index,
            )
            nodes[node.id] = node
            pending_children[node.id] = list(dict.fromkeys(block.urls))
            ids.append(node.id)
        page_nodes[url] = ids

    for node_id, urls in pending_children.items():
        children: list[str] = []
        for url in urls:
            for child_id in page_nodes.get(url, ()):
                if child_id != node_id and child_id not in children:
                    children.append(child_id)
        nodes[node_id].child_ids = children

    graph = TGraph(nodes, level_count=1, osm_threshold=osm_threshold)
    _assign_levels(graph)
    graph.validate()
    return graph


def _assign_levels(graph: TGraph) -> None:
    """Stage 2: distances = shortest hops to a target; levels = distances.

    Nodes with no path to a target sit one level above the deepest
    reachable node and carry the sentinel distance `level_count`.
    """
    reverse: dict[str, list[str]] = {node_id: [] for node_id in graph.nodes}
    for node in graph.nodes.values():
        for child_id in node.child_ids:
            if child_id in reverse:
                reverse[child_id].append(node.id)
    distance = {n.id: 0 for n in graph.nodes.values() if n.is_target}
    queue = sorted(distance)
    while queue:
        next_queue: list[str] = []
        for node_id in queue:
            for parent_id in reverse[node_id]:
                if parent_id not in distance:
                    distance[parent_id] = distance[node_id] + 1
                    next_queue.append(parent_id)
        queue = sorted(next_queue)

    max_reachable = max(distance.values(), default=0)
    unreachable_ids = [n for n in graph.nodes if n not in distance]
    if unreachable_ids:
        level_count = max_reachable + 2
        sentinel = level_count
        for node_id in unreachable_ids:
            node = graph.nodes[node_id]
            node.level = max_reachable + 1
            node.dic_link_distance = sentinel
            node.unreachable = True
    else:
        level_count = max_reachable + 1
    for node_id, dist in distance.items():
        node = graph.nodes[node_id]
        node.level = dist
        node.dic_link_distance = dist
        node.unreachable = False
    graph.level_count = level_count
    for node in graph.nodes.values():
        node.child_ids = [
            c for c in node.child_ids if graph.nodes[c].level < node.level
        ]


def node_similarity(node: TGraphNode, ctx: LinkContext) -> NodeSimilarity:
    """The four cosine similarities of a node against a link's context."""
    return NodeSimilarity(
        ish=cosine(node.ish_vec, build_tf_vector(ctx.u_terms)),
        sh=cosine(node.sh_vec, build_tf_vector(ctx.sh_terms)),
        mh=cosine(node.mh_vec, build_tf_vector(ctx.mh_terms)),
        dc=cosine(node.dc_vec, build_tf_vector(ctx.boundary_terms)),
    )


def osm(sims: NodeSimilarity | tuple[float, float, float, float]) -> float:
    """Overall similarity measure: the mean of the four similarities."""
    ish, sh, mh, dc = sims
    return (ish + sh + mh + dc) / 4.0


def matching_nodes(graph: TGraph, ctx: LinkContext) -> list[tuple[TGraphNode, float]]:
    """Nodes whose OSM reaches the threshold (inclusive), with their OSM."""
    matches = []
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        value = osm(node_similarity(node, ctx))
        if value >= graph.osm_threshold:
            matches.append((node, value))
    return matches


def priority_for_link(graph: TGraph, ctx: LinkContext) -> tuple[float, int | None]:
    """Priority in (0, 1] plus the matched minimum link distance (None = fallback).

    Matching nodes: 1 / min(link distance), with a target match (distance 0)
    clamped to 1.0. No matching node: 1 / (level count + 1).
    """
    matches = matching_nodes(graph, ctx)
    if matches:
        min_distance = min(node.dic_link_distance for node, _ in matches)
        return 1.0 / max(1, min_distance), min_distance
    return 1.0 / (graph.level_count + 1), None


def watchdog_rescore(graph: TGraph, observations: Mapping[str, bytes]) -> TGraph:
    """Refresh vectors/edges of nodes whose pages were re-fetched; re-level.

    Minimal contract: nodes of observed pages get vectors rebuilt from the
    new content (matched by paragraph index; vanished paragraphs lose their
    edges), then stage-2 leveling runs again. Returns a new graph; the old
    one stays valid for readers until swapped.
    """
    nodes = {
        node_id: TGraphNode(
            id=node.id,
            level=node.level,
            ish_vec=TermFrequencyVector(dict(node.ish_vec.counts)),
            sh_vec=TermFrequencyVector(dict(node.sh_vec.counts)),
            mh_vec=TermFrequencyVector(dict(node.mh_vec.counts)),
            dc_vec=TermFrequencyVector(dict(node.dc_vec.counts)),
            dic_link_distance=node.dic_link_distance,
            is_target=node.is_target,
            child_ids=list(node.child_ids),
            source_url=node.source_url,
            block_index=node.block_index,
            unreachable=node.unreachable,
        )
        for node_id, node in graph.nodes.items()
    }
    page_nodes: dict[str, list[str]] = {}
    for node_id in sorted(nodes):
        page_nodes.setdefault(nodes[node_id].source_url, []).append(node_id)

    for url in sorted(observations):
        canon = canonicalize(url)
        if canon is None or canon not in page_nodes:
            continue
        elements = extract_page_elements(parse_html(observations[url]), canon)
        blocks = {b.index: b for b in elements.link_blocks}
        for node_id in page_nodes[canon]:
            node = nodes[node_id]
            if node.is_target:
                node.mh_vec = _vector_of(elements.main_heading)
                node.dc_vec = build_tf_vector(elements.body_terms)
                continue
            block = blocks.get(node.block_index)
            if block is None:
                node.child_ids = []
                continue
            node.ish_vec = _vector_of(block.subheading_u)
            node.sh_vec = _vector_of(block.section_heading)
            node.mh_vec = _vector_of(block.main_heading)
            node.dc_vec = _vector_of(block.text) or node.dc_vec
            children: list[str] = []
            for link_url in dict.fromkeys(block.urls):
                for child_id in page_nodes.get(link_url, ()):
                    if child_id != node_id and child_id not in children:
                        children.append(child_id)
            node.child_ids = children

    rescored = TGraph(nodes, graph.level_count, graph.osm_threshold)
    _assign_levels(rescored)
    rescored.validate()
    return rescored


def _vec_to_json(vec: TermFrequencyVector) -> dict[str, int]:
    return dict(sorted(vec.counts.items()))


def serialize(graph: TGraph) -> str:
    """Versioned, self-describing JSON text; byte-stable for equal graphs."""
    payload = {
        "format": _FORMAT,
        "version": _VERSION,
        "level_count": graph.level_count,
        "osm_threshold": graph.osm_threshold,
        "nodes": [
            {
                "id": node.id,
                "level": node.level,
                "distance": node.dic_link_distance,
                "target": node.is_target,
                "unreachable": node.unreachable,
                "source_url": node.source_url,
                "block_index": node.block_index,
                "children": node.child_ids,
                "ish": _vec_to_json(node.ish_vec),
                "sh": _vec_to_json(node.sh_vec),
                "mh": _vec_to_json(node.mh_vec),
                "dc": _vec_to_json(node.dc_vec),
            }
            for _, node in sorted(graph.nodes.items())
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=1)


def deserialize(text: str | bytes) -> TGraph:
    """Load a serialized graph, failing loudly on any corruption."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TGraphFormatError(f"not valid T-Graph JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != _FORMAT:
        raise TGraphFormatError("missing T-Graph format header")
    if payload.get("version") != _VERSION:
        raise TGraphFormatError(f"unsupported version {payload.get('version')!r}")
    try:
        nodes = {}
        for entry in payload["nodes"]:
            node = TGraphNode(
                id=entry["id"],
                level=int(entry["level"]),
                ish_vec=TermFrequencyVector(dict(entry["ish"])),
                sh_vec=TermFrequencyVector(dict(entry["sh"])),
                mh_vec=TermFrequencyVector(dict(entry["mh"])),
                dc_vec=TermFrequencyVector(dict(entry["dc"])),
                dic_link_distance=int(entry["distance"]),
                is_target=bool(entry["target"]),
                child_ids=list(entry["children"]),
                source_url=entry["source_url"],
                block_index=int(entry["block_index"]),
                unreachable=bool(entry["unreachable"]),
            )
            nodes[node.id] = node
        graph = TGraph(
            nodes,
            level_count=int(payload["level_count"]),
            osm_threshold=float(payload["osm_threshold"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TGraphFormatError(f"malformed T-Graph payload: {exc}") from exc
    graph.validate()
    return graph


def save(graph: TGraph, path: str | Path) -> None:
    Path(path).write_text(serialize(graph), encoding="utf-8")


def load(path: str | Path) -> TGraph:
    return deserialize(Path(path).read_text(encoding="utf-8"))
