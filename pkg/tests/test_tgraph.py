import random
from collections import deque

import pytest

from treasure_crawler.tgraph import (
    LinkContext,
    NodeSimilarity,
    TGraphBuildError,
    TGraphFormatError,
    build_from_corpus,
    deserialize,
    matching_nodes,
    node_similarity,
    osm,
    priority_for_link,
    serialize,
    watchdog_rescore,
)
from treasure_crawler.textproc import build_tf_vector, cosine


def page(title, paragraphs):
    """paragraphs: list of (text, [(href, anchor)])"""
    first = title.split()[0]
    body = [f"<h1>{title}</h1>", f"<h2>{first} section</h2>", f"<h3>{first} detail</h3>"]
    for text, links in paragraphs:
        anchors = " ".join(f'<a href="{href}">{anchor}</a>' for href, anchor in links)
        body.append(f"<p>{text} {anchors}</p>")
    return f"<html><body>{''.join(body)}</body></html>".encode()


def terms_of(vec):
    return [t for t, c in vec.counts.items() for _ in range(c)]


A = "http://s.test/a.html"
B = "http://s.test/b.html"
T = "http://s.test/t.html"
T2 = "http://s.test/t2.html"


@pytest.fixture
def chain_graph():
    # A -> B -> T
    pages = {
        A: page("alpha page", [("points to bravo", [(B, "bravo link")])]),
        B: page("bravo page", [("points to target", [(T, "target link")])]),
        T: page("target page", [("terminal text", [])]),
    }
    return build_from_corpus(pages, [T])


def bfs_distance_oracle(graph):
    """Independent multi-source BFS over the child edges."""
    dist = {n.id: 0 for n in graph.nodes.values() if n.is_target}
    queue = deque(sorted(dist))
    reverse = {}
    for node in graph.nodes.values():
        for child in node.child_ids:
            reverse.setdefault(child, []).append(node.id)
    while queue:
        current = queue.popleft()
        for parent in reverse.get(current, ()):
            if parent not in dist:
                dist[parent] = dist[current] + 1
                queue.append(parent)
    return dist


class TestConstruction:
    def test_chain(self, chain_graph):
        g = chain_graph
        assert len(g.nodes) == 3
        a_node = g.nodes[f"{A}#b0"]
        b_node = g.nodes[f"{B}#b0"]
        t_node = g.nodes[T]
        assert (a_node.level, a_node.dic_link_distance) == (2, 2)
        assert (b_node.level, b_node.dic_link_distance) == (1, 1)
        assert (t_node.level, t_node.dic_link_distance) == (0, 0)
        assert t_node.is_target
        assert a_node.child_ids == [b_node.id]
        assert b_node.child_ids == [t_node.id]
        assert g.level_count == 3

    def test_chain_matches_bfs_oracle(self, chain_graph):
        oracle = bfs_distance_oracle(chain_graph)
        for node in chain_graph.nodes.values():
            assert node.dic_link_distance == oracle[node.id]

    def test_two_links_one_paragraph(self):
        pages = {
            A: page("multi", [("both targets here", [(T, "one"), (T2, "two")])]),
            T: page("t one", [("body", [])]),
            T2: page("t two", [("body", [])]),
        }
        g = build_from_corpus(pages, [T, T2])
        a_node = g.nodes[f"{A}#b0"]
        assert len(g.nodes) == 3
        assert a_node.child_ids == [T, T2]
        assert a_node.level == 1
        assert g.level_count == 2

    def test_two_paragraphs_two_nodes(self):
        pages = {
            A: page("two paras", [
                ("first paragraph", [(T, "one")]),
                ("second paragraph", [(T2, "two")]),
            ]),
            T: page("t one", [("body", [])]),
            T2: page("t two", [("body", [])]),
        }
        g = build_from_corpus(pages, [T, T2])
        assert {n.block_index for n in g.nodes.values() if not n.is_target} == {0, 1}

    def test_no_targets_fails(self):
        with pytest.raises(TGraphBuildError):
            build_from_corpus({A: page("a", [("x", [])])}, [])

    def test_target_outside_sample_fails(self):
        with pytest.raises(TGraphBuildError):
            build_from_corpus({A: page("a", [("x", [])])}, [T])

    def test_unreachable_node_sentinel(self):
        orphan = "http://s.test/orphan.html"
        pages = {
            A: page("a", [("to target", [(T, "t")])]),
            T: page("t", [("body", [])]),
            orphan: page("orphan", [("points nowhere in sample", [("http://else/x", "x")])]),
        }
        g = build_from_corpus(pages, [T])
        node = g.nodes[f"{orphan}#b0"]
        assert node.unreachable
        assert node.dic_link_distance == g.level_count
        assert node.child_ids == []
        assert g.level_count == 3  # levels 0(target), 1(A), 2(orphan)

    def test_deterministic_rebuild(self):
        pages = {
            A: page("alpha", [("to b", [(B, "b")])]),
            B: page("bravo", [("to t", [(T, "t")])]),
            T: page("target", [("body", [])]),
        }
        assert serialize(build_from_corpus(pages, [T])) == serialize(
            build_from_corpus(pages, [T])
        )

    def test_distances_match_oracle_on_random_webs(self):
        rng = random.Random(77)
        for _ in range(10):
            n = rng.randint(4, 12)
            urls = [f"http://w.test/p{i}.html" for i in range(n)]
            pages = {}
            for i, url in enumerate(urls):
                outlinks = [
                    (urls[j], f"to {j}")
                    for j in sorted(rng.sample(range(n), rng.randint(1, 3)))
                    if j != i
                ]
                pages[url] = page(f"page {i}", [("links here", outlinks)])
            g = build_from_corpus(pages, [urls[0]])
            oracle = bfs_distance_oracle(g)
            for node in g.nodes.values():
                if node.unreachable:
                    assert node.id not in oracle
                    assert node.dic_link_distance == g.level_count
                else:
                    assert node.dic_link_distance == oracle[node.id]
                for child_id in node.child_ids:
                    assert g.nodes[child_id].level < node.level


class TestSimilarity:
    def test_identical_vectors(self, chain_graph):
        node = chain_graph.nodes[f"{B}#b0"]
        ctx = LinkContext(
            u_terms=[],
            sh_terms=[],
            mh_terms=terms_of(node.mh_vec),
            boundary_terms=terms_of(node.dc_vec),
        )
        sims = node_similarity(node, ctx)
        assert abs(sims.mh - 1.0) <= 1e-12

    def test_disjoint_and_empty(self, chain_graph):
        node = chain_graph.nodes[f"{B}#b0"]
        ctx = LinkContext(["zzz"], [], [], ["qqq"])
        sims = node_similarity(node, ctx)
        assert sims == NodeSimilarity(0.0, 0.0, 0.0, 0.0)

    def test_manual_cosine(self):
        v1 = build_tf_vector(["a", "b"])
        v2 = build_tf_vector(["a"])
        assert abs(cosine(v1, v2) - 0.7071067811865475) <= 1e-12

    def test_cosine_oracle_and_range(self):
        rng = random.Random(11)
        terms = [f"t{i}" for i in range(20)]
        for _ in range(300):
            va = build_tf_vector([rng.choice(terms) for _ in range(rng.randrange(0, 25))])
            vb = build_tf_vector([rng.choice(terms) for _ in range(rng.randrange(0, 25))])
            got = cosine(va, vb)
            assert got == cosine(vb, va)  # exact symmetry
            assert 0.0 <= got <= 1.0
            dot = sum(va.counts.get(t, 0) * vb.counts.get(t, 0) for t in terms)
            if dot == 0:
                assert got == 0.0
            else:
                brute = dot / (va.magnitude() * vb.magnitude())
                assert abs(got - brute) <= 1e-9


class TestOsm:
    def test_all_ones(self):
        assert osm((1.0, 1.0, 1.0, 1.0)) == 1.0

    def test_all_zeros(self):
        assert osm((0.0, 0.0, 0.0, 0.0)) == 0.0

    def test_boundary_value(self):
        assert osm((0.2, 0.0, 0.0, 0.0)) == 0.05


class TestMatching:
    def test_no_matches_when_all_zero(self, chain_graph):
        assert matching_nodes(chain_graph, LinkContext(["z"], ["z"], ["z"], ["z"])) == []

    def test_threshold_inclusive_at_exact_boundary(self):
        # ISH={a:1} against u-terms {a:1,b:2,c:2,d:4}: cosine = 1/5 exactly,
        # the other three similarities 0, so OSM is exactly 0.05
        from treasure_crawler.tgraph import TGraph, TGraphNode
        from treasure_crawler.textproc import TermFrequencyVector

        target = TGraphNode(
            id="t", level=0, ish_vec=TermFrequencyVector(),
            sh_vec=TermFrequencyVector(), mh_vec=TermFrequencyVector(),
            dc_vec=TermFrequencyVector(), dic_link_distance=0, is_target=True,
        )
        node = TGraphNode(
            id="n", level=1, ish_vec=TermFrequencyVector({"a": 1}),
            sh_vec=TermFrequencyVector(), mh_vec=TermFrequencyVector(),
            dc_vec=TermFrequencyVector({"z": 1}), dic_link_distance=1,
            is_target=False, child_ids=["t"],
        )
        graph = TGraph({"t": target, "n": node}, level_count=2)
        ctx = LinkContext(
            u_terms=["a"] + ["b"] * 2 + ["c"] * 2 + ["d"] * 4,
            sh_terms=[], mh_terms=[], boundary_terms=["q"],
        )
        sims = node_similarity(node, ctx)
        assert sims.ish == 0.2
        assert osm(sims) == 0.05
        matched = [n.id for n, _ in matching_nodes(graph, ctx)]
        assert matched == ["n"]

    def test_identical_node_texts_match_at_one(self, chain_graph):
        node = chain_graph.nodes[f"{B}#b0"]
        ctx = LinkContext(
            u_terms=terms_of(node.ish_vec),
            sh_terms=terms_of(node.sh_vec),
            mh_terms=terms_of(node.mh_vec),
            boundary_terms=terms_of(node.dc_vec),
        )
        matches = {n.id: value for n, value in matching_nodes(chain_graph, ctx)}
        assert node.id in matches
        assert abs(matches[node.id] - 1.0) <= 1e-12


class TestPriority:
    def test_min_distance(self, chain_graph):
        # boundary matching B's paragraph text: B node (distance 1) matches
        b_node = chain_graph.nodes[f"{B}#b0"]
        ctx = LinkContext(
            u_terms=[],
            sh_terms=[],
            mh_terms=terms_of(b_node.mh_vec),
            boundary_terms=terms_of(b_node.dc_vec),
        )
        priority, dmin = priority_for_link(chain_graph, ctx)
        assert dmin is not None
        assert priority == 1.0 / max(1, dmin)

    def test_fallback(self, chain_graph):
        priority, dmin = priority_for_link(chain_graph, LinkContext(["z"], ["z"], ["z"], ["z"]))
        assert dmin is None
        assert priority == 1.0 / (chain_graph.level_count + 1)

    def test_fallback_below_any_match_score(self, chain_graph):
        # 1/(levels+1) < 1/d for every distance d <= level_count
        fallback = 1.0 / (chain_graph.level_count + 1)
        for d in range(1, chain_graph.level_count + 1):
            assert fallback < 1.0 / d

    def test_output_in_unit_interval(self, chain_graph):
        rng = random.Random(3)
        vocab = ["alpha", "bravo", "target", "page", "point", "z"]
        for _ in range(50):
            ctx = LinkContext(
                *[[rng.choice(vocab) for _ in range(rng.randrange(4))] for _ in range(4)]
            )
            priority, _ = priority_for_link(chain_graph, ctx)
            assert 0.0 < priority <= 1.0


class TestSerialization:
    def test_round_trip(self, chain_graph):
        text = serialize(chain_graph)
        reloaded = deserialize(text)
        assert serialize(reloaded) == text
        assert reloaded.level_count == chain_graph.level_count
        assert set(reloaded.nodes) == set(chain_graph.nodes)
        for node_id, node in chain_graph.nodes.items():
            other = reloaded.nodes[node_id]
            assert (node.level, node.dic_link_distance, node.is_target) == (
                other.level, other.dic_link_distance, other.is_target,
            )
            assert node.child_ids == other.child_ids
            assert node.dc_vec == other.dc_vec

    def test_truncated_stream_rejected(self, chain_graph):
        text = serialize(chain_graph)
        with pytest.raises(TGraphFormatError):
            deserialize(text[: len(text) // 2])

    def test_level_cycle_rejected(self, chain_graph):
        # hand-edit: make the chain point upward, creating a level violation
        text = serialize(chain_graph).replace('"level": 2', '"level": 0')
        with pytest.raises(TGraphFormatError):
            deserialize(text)

    def test_wrong_format_and_version(self):
        with pytest.raises(TGraphFormatError):
            deserialize("{}")
        with pytest.raises(TGraphFormatError):
            deserialize('{"format": "treasure-tgraph", "version": 99, "nodes": []}')


class TestWatchdog:
    def test_no_observations_graph_unchanged(self, chain_graph):
        rescored = watchdog_rescore(chain_graph, {})
        assert serialize(rescored) == serialize(chain_graph)

    def test_dc_text_replacement_refreshes_one_node(self, chain_graph):
        new_b = page("bravo page", [("fresh words entirely", [(T, "target link")])])
        rescored = watchdog_rescore(chain_graph, {B: new_b})
        changed = rescored.nodes[f"{B}#b0"]
        original = chain_graph.nodes[f"{B}#b0"]
        assert changed.dc_vec != original.dc_vec
        assert "fresh" in changed.dc_vec.counts
        assert changed.dic_link_distance == original.dic_link_distance
        untouched = rescored.nodes[f"{A}#b0"]
        assert untouched.dc_vec == chain_graph.nodes[f"{A}#b0"].dc_vec
        oracle = bfs_distance_oracle(rescored)
        for node in rescored.nodes.values():
            if not node.unreachable:
                assert node.dic_link_distance == oracle[node.id]

    def test_path_removal_flags_unreachable(self, chain_graph):
        # B's paragraph no longer links to the target
        new_b = page("bravo page", [("points to target", [("http://else/x", "gone")])])
        rescored = watchdog_rescore(chain_graph, {B: new_b})
        b_node = rescored.nodes[f"{B}#b0"]
        a_node = rescored.nodes[f"{A}#b0"]
        assert b_node.unreachable and a_node.unreachable
        assert b_node.dic_link_distance == rescored.level_count
