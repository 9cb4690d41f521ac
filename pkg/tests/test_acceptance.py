"""Acceptance criteria, one test per criterion.

Each test prints a PASS/FAIL line (visible with `pytest -s` or `-rA`) and
enforces the stated tolerance and runtime budget.
"""

import json
import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from treasure_crawler import tgraph as tg
from treasure_crawler.corpus import CorpusSnapshot
from treasure_crawler.ddc import DNumber, seed_lexicon_path
from treasure_crawler.engine import CrawlConfig, ProcessDeps, process_page, run_crawl
from treasure_crawler.fetch import FetchOutcome
from treasure_crawler.frontier import Frontier
from treasure_crawler.galaxy import Dot, TopicConfig, find_galaxy, plot_dots, region_weight
from treasure_crawler.htmldoc import BoundaryWord
from treasure_crawler.metrics import compute_metrics, load_labels
from treasure_crawler.porter import stem
from treasure_crawler.repository import Repository
from treasure_crawler.synthweb import SynthParams, generate_corpus
from treasure_crawler.tgraph import (
    LinkContext,
    TGraph,
    TGraphNode,
    build_from_corpus,
    matching_nodes,
    node_similarity,
    osm,
    priority_for_link,
)
from treasure_crawler.textproc import TermFrequencyVector, build_tf_vector, cosine


@contextmanager
def criterion(number: int, name: str, budget_seconds: float | None = None):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number:02d} {name}: FAIL")
        raise
    elapsed = time.perf_counter() - start
    if budget_seconds is not None and elapsed >= budget_seconds:
        print(f"ACCEPTANCE {number:02d} {name}: FAIL (runtime {elapsed:.2f}s)")
        pytest.fail(f"runtime {elapsed:.2f}s exceeds {budget_seconds}s budget")
    print(f"ACCEPTANCE {number:02d} {name}: PASS ({elapsed:.2f}s)")


def random_dot(rng: random.Random) -> Dot:
    length = rng.randint(1, 6)
    int_len = min(length, rng.randint(1, 3))
    digits = "".join(rng.choice("0123456789") for _ in range(length))
    return Dot(DNumber(digits[:int_len], digits[int_len:]), rng.random() < 0.5)


def test_01_region_weight_oracle():
    with criterion(1, "region weight equals straight-loop oracle", 1.0):
        rng = random.Random(20240901)
        for _ in range(200):
            dots = [random_dot(rng) for _ in range(rng.randint(0, 30))]
            total = 0.0
            for d in dots:
                total += len(d.code) * (1.4 if d.is_anchor else 1.0)
            expected = len(dots) * total
            assert abs(region_weight(dots) - expected) <= 1e-12


def test_02_galaxy_brute_force_equivalence():
    def oracle(dots, depth):
        survivors = list(dots)
        for position in range(depth):
            best, kept = None, []
            for digit in "0123456789":
                region = [d for d in survivors
                          if len(d.code) > position and d.code.digit_at(position) == digit]
                if not region:
                    continue
                w = len(region) * sum(
                    len(d.code) * (Fraction(14, 10) if d.is_anchor else Fraction(1))
                    for d in region
                )
                if best is None or w > best:
                    best, kept = w, [region]
                elif w == best:
                    kept.append(region)
            if best is None:
                return None
            survivors = [d for region in kept for d in region]
        return {d.code.prefix(depth) for d in survivors}

    with criterion(2, "galaxy equals exhaustive region enumeration", 5.0):
        rng = random.Random(20240902)
        for _ in range(100):
            dots = [random_dot(rng) for _ in range(rng.randint(1, 30))]
            got = find_galaxy(dots, 3)
            assert (got.prefixes if got else None) == oracle(dots, 3)


def test_03_worked_example_religions(seed_lexicon):
    with criterion(3, "29x worked example and 299 refinement"):
        words = ["buddhism", "hinduism", "sikhism", "islam", "judaism", "zoroastrianism"]
        boundary = [BoundaryWord(stem(w), True) for w in words]
        result = find_galaxy(plot_dots(boundary, seed_lexicon), 3)
        assert result is not None
        assert all(p.startswith("29") for p in result.prefixes)

        dominant_299 = ["animism", "shamanism", "totemism", "wicca", "shinto", "taoism"]
        boundary = [BoundaryWord(stem(w), False) for w in dominant_299]
        result = find_galaxy(plot_dots(boundary, seed_lexicon), 3)
        assert result.prefixes == {"299"}


def test_04_cosine_properties():
    with criterion(4, "cosine symmetry, range, oracle agreement", 1.0):
        rng = random.Random(20240904)
        terms = [f"t{i}" for i in range(15)]
        for _ in range(500):
            va = build_tf_vector([rng.choice(terms) for _ in range(rng.randrange(0, 20))])
            vb = build_tf_vector([rng.choice(terms) for _ in range(rng.randrange(0, 20))])
            got = cosine(va, vb)
            assert got == cosine(vb, va)
            assert 0.0 <= got <= 1.0
            dot = sum(va.counts.get(t, 0) * vb.counts.get(t, 0) for t in terms)
            if va.counts and vb.counts and dot:
                assert abs(got - dot / (va.magnitude() * vb.magnitude())) <= 1e-9
        identical = build_tf_vector(["a", "a", "b", "c"])
        assert abs(cosine(identical, identical) - 1.0) <= 1e-12
        assert cosine(build_tf_vector(["a"]), build_tf_vector(["b"])) == 0.0


def _vec(counts):
    return TermFrequencyVector(dict(counts))


def _node(node_id, level, distance, dc_terms, target=False):
    return TGraphNode(
        id=node_id, level=level,
        ish_vec=_vec({}), sh_vec=_vec({}), mh_vec=_vec({}),
        dc_vec=_vec(dc_terms), dic_link_distance=distance, is_target=target,
    )


def test_05_osm_and_priority_exactness(seed_lexicon):
    with criterion(5, "OSM 0.05 boundary, priorities 0.5/0.25/0.01"):
        assert osm((0.2, 0.0, 0.0, 0.0)) == 0.05

        # two matching nodes at distances 2 and 4 -> priority exactly 0.5
        target = _node("t", 0, 0, {}, target=True)
        near = _node("n2", 2, 2, {"shared": 1})
        far = _node("n4", 4, 4, {"shared": 1})
        near.child_ids = []
        graph = TGraph({"t": target, "n2": near, "n4": far}, level_count=5)
        ctx = LinkContext([], [], [], ["shared"])
        matched = {n.id for n, _ in matching_nodes(graph, ctx)}
        assert matched == {"n2", "n4"}
        priority, dmin = priority_for_link(graph, ctx)
        assert priority == 0.5 and dmin == 2

        # OSM exactly at the threshold is included (node ISH={a:1} vs
        # u-terms of magnitude 5 sharing one term -> cosine 1/5)
        boundary_node = _node("nb", 1, 1, {"zz": 1})
        boundary_node.ish_vec = _vec({"a": 1})
        graph_b = TGraph({"t": target, "nb": boundary_node}, level_count=2)
        ctx_b = LinkContext(["a", "b", "b", "c", "c", "d", "d", "d", "d"], [], [], ["q"])
        sims = node_similarity(boundary_node, ctx_b)
        assert osm(sims) == 0.05
        assert {n.id for n, _ in matching_nodes(graph_b, ctx_b)} == {"nb"}

        # no matches with level_count 3 -> 1/(3+1)
        graph_c = TGraph({"t": target, "n2": near}, level_count=3)
        priority, dmin = priority_for_link(graph_c, LinkContext(["x"], [], [], ["y"]))
        assert priority == 0.25 and dmin is None

        # target-node match (distance 0) clamps to 1.0
        t_match = _node("tm", 0, 0, {"hit": 1}, target=True)
        graph_d = TGraph({"tm": t_match}, level_count=1)
        priority, dmin = priority_for_link(graph_d, LinkContext([], [], [], ["hit"]))
        assert priority == 1.0 and dmin == 0

        # off-topic links get the configured floor through the engine path
        deps = ProcessDeps(
            lexicon=seed_lexicon, graph=graph, topics=TopicConfig(topics={"299"}),
        )
        outcome = FetchOutcome(
            "http://x/p", "success", final_url="http://x/p",
            body=b"<p>astronomy geology <a href='n.html'>physics survey</a></p>",
            content_type="text/html", status=200,
        )
        record, _, _ = process_page(outcome, deps)
        assert record.links[0].priority == 0.01


def _page(title, paragraphs):
    body = [f"<h1>{title}</h1>"]
    for text, links in paragraphs:
        anchors = " ".join(f'<a href="{h}">{a}</a>' for h, a in links)
        body.append(f"<p>{text} {anchors}</p>")
    return f"<html><body>{''.join(body)}</body></html>".encode()


def test_06_tgraph_construction_fixtures():
    with criterion(6, "T-Graph two-stage construction matches hand trace"):
        a, b, t = "http://w/a.html", "http://w/b.html", "http://w/t.html"
        chain = build_from_corpus({
            a: _page("alpha", [("to bravo", [(b, "bravo")])]),
            b: _page("bravo", [("to target", [(t, "target")])]),
            t: _page("target", [("terminal", [])]),
        }, [t])
        assert len(chain.nodes) == 3
        assert chain.nodes[f"{a}#b0"].level == 2
        assert chain.nodes[f"{a}#b0"].dic_link_distance == 2
        assert chain.nodes[f"{a}#b0"].child_ids == [f"{b}#b0"]
        assert chain.nodes[f"{b}#b0"].level == 1
        assert chain.nodes[f"{b}#b0"].dic_link_distance == 1
        assert chain.nodes[f"{b}#b0"].child_ids == [t]
        assert chain.nodes[t].is_target and chain.nodes[t].level == 0
        assert chain.level_count == 3

        t2 = "http://w/t2.html"
        multi = build_from_corpus({
            a: _page("multi", [("both", [(t, "one"), (t2, "two")])]),
            t: _page("t1", [("x", [])]),
            t2: _page("t2", [("y", [])]),
        }, [t, t2])
        node = multi.nodes[f"{a}#b0"]
        assert len(multi.nodes) == 3
        assert node.child_ids == [t, t2]
        assert (node.level, node.dic_link_distance) == (1, 1)

        # independent BFS oracle over child edges
        for graph in (chain, multi):
            dist = {n.id: 0 for n in graph.nodes.values() if n.is_target}
            frontier = sorted(dist)
            while frontier:
                nxt = []
                for node in graph.nodes.values():
                    for child in node.child_ids:
                        if child in dist and node.id not in dist:
                            dist[node.id] = dist[child] + 1
                            nxt.append(node.id)
                frontier = nxt
            for node in graph.nodes.values():
                assert node.dic_link_distance == dist[node.id]


def test_07_starvation_bound():
    with criterion(7, "0.01 item out by cycle 890 under 0.9 stream", 1.0):
        frontier = Frontier(aging_delta=0.001)
        frontier.enqueue("http://starved/", 0.01, 0)
        bound = math.ceil((0.9 - 0.01) / 0.001)
        assert bound == 890
        dequeued_at = None
        for cycle in range(1, bound + 5):
            frontier.enqueue(f"http://stream/{cycle:05d}", 0.9, cycle)
            if frontier.dequeue_highest(cycle).url == "http://starved/":
                dequeued_at = cycle
                break
        assert dequeued_at is not None and dequeued_at <= bound


TOPICS = ["294", "296", "297", "299"]


def _crawl_config(corpus_dir, graph_path, out_dir, seed_url, **overrides):
    config = CrawlConfig(
        seeds=[seed_url],
        topics=list(TOPICS),
        tgraph_path=str(graph_path),
        lexicon_path=str(seed_lexicon_path()),
        adapter="corpus",
        corpus_path=str(corpus_dir),
        max_pages=200,
        checkpoint_every=50,
        output_dir=str(out_dir),
    )
    for key, value in overrides.items():
        setattr(config, key, value)
    return config


def _build_graph(corpus_dir, graph_path):
    sample = CorpusSnapshot.load(corpus_dir, manifest_name="sample_manifest.tsv")
    targets = [
        l.strip()
        for l in (corpus_dir / "targets.txt").read_text().splitlines()
        if l.strip()
    ]
    tg.save(build_from_corpus(sample.pages(), targets), graph_path)


def test_08_determinism_and_resume(tmp_path):
    with criterion(8, "byte-identical reruns; resume equals uninterrupted", 30.0):
        gen = generate_corpus(
            tmp_path / "corpus",
            SynthParams(pages=200, cluster=40, bridge=2, sample=12, targets=3, seed=11),
        )
        graph_path = tmp_path / "graph.json"
        _build_graph(tmp_path / "corpus", graph_path)

        def config(out, **kw):
            return _crawl_config(tmp_path / "corpus", graph_path, out, gen.seed_url, **kw)

        run_crawl(config(tmp_path / "run1"))
        run_crawl(config(tmp_path / "run2"))
        log1 = (tmp_path / "run1" / "crawl_order.log").read_bytes()
        log2 = (tmp_path / "run2" / "crawl_order.log").read_bytes()
        assert log1 == log2
        assert (tmp_path / "run1" / "records.jsonl").read_bytes() == (
            tmp_path / "run2" / "records.jsonl"
        ).read_bytes()

        # interrupt at page 100, resume to the full budget
        run_crawl(config(tmp_path / "run3", max_pages=100))
        run_crawl(config(tmp_path / "run3", max_pages=200), resume=True)
        assert (tmp_path / "run3" / "records.jsonl").read_bytes() == (
            tmp_path / "run1" / "records.jsonl"
        ).read_bytes()
        assert (tmp_path / "run3" / "crawl_order.log").read_bytes() == log1


def test_09_robustness_fuzz(seed_lexicon):
    with criterion(9, "1000 mutated pages: record or counted skip", 30.0):
        rng = random.Random(20240909)
        bases = [
            _page("fuzz base", [("text here", [("http://h/x.html", "anchor words")])]),
            b"<html><head><title>t</title><meta charset='utf-8'></head>"
            b"<body><ul><li><a href='a'>one</a></li><li>two</li></ul></body></html>",
            b"<div><h2>s</h2><p>alpha <a href='b'>beta</a><script>x<y</script></p></div>",
        ]
        snippets = [b"<", b">", b"</p>", b"<p", b"&amp", b"<!--", b"\x00\xff",
                    b"<a href=", b"]]>", b"<script>", b"<ul><li", b"\xc3\x28"]
        graph = TGraph(
            {"t": _node("t", 0, 0, {}, target=True)}, level_count=1
        )
        deps = ProcessDeps(lexicon=seed_lexicon, graph=graph,
                           topics=TopicConfig(topics={"299"}), size_cap=1 << 16)
        records = skips = 0
        for i in range(1000):
            raw = bytearray(rng.choice(bases))
            for _ in range(rng.randrange(1, 6)):
                op = rng.randrange(4)
                pos = rng.randrange(len(raw) + 1)
                if op == 0:
                    raw[pos:pos] = rng.choice(snippets)
                elif op == 1 and raw:
                    del raw[pos : pos + rng.randrange(1, 40)]
                elif op == 2:
                    raw = raw[: rng.randrange(len(raw) + 1)]
                else:
                    raw[pos:pos] = bytes(rng.randrange(256) for _ in range(6))
            outcome = FetchOutcome(
                f"http://fuzz/{i}", "success", final_url=f"http://fuzz/{i}",
                body=bytes(raw), content_type="text/html", status=200,
            )
            record, _, _ = process_page(outcome, deps)
            assert record is not None
            if record.outcome_kind == "skipped":
                skips += 1
            else:
                records += 1
        assert records + skips == 1000


def test_10_tunneling_experiment(tmp_path):
    with criterion(10, "treasure beats breadth-first through the bridge", 120.0):
        gen = generate_corpus(
            tmp_path / "corpus",
            SynthParams(pages=500, cluster=100, bridge=3, sample=20, targets=5, seed=0),
        )
        graph_path = tmp_path / "graph.json"
        _build_graph(tmp_path / "corpus", graph_path)
        labels = load_labels(gen.labels_path)

        def run(strategy, out):
            config = _crawl_config(
                tmp_path / "corpus", graph_path, out, gen.seed_url,
                max_pages=250, strategy=strategy,
            )
            run_crawl(config)
            return compute_metrics(Repository(out), labels, curve_every=50)

        treasure = run("treasure", tmp_path / "treasure")
        bfs = run("breadth_first", tmp_path / "bfs")
        print(f"  treasure: harvest={treasure.harvest_ratio:.3f} "
              f"relevant={treasure.relevant_fetched}")
        print(f"  breadth-first: harvest={bfs.harvest_ratio:.3f} "
              f"relevant={bfs.relevant_fetched}")
        assert treasure.harvest_ratio > bfs.harvest_ratio
        assert treasure.relevant_fetched * 10 >= bfs.relevant_fetched * 11


def test_11_porter_reference_agreement(porter_pairs):
    with criterion(11, "stemmer agrees with shipped reference pairs", 1.0):
        disagreements = [
            (word, expected, stem(word))
            for word, expected in porter_pairs
            if stem(word) != expected
        ]
        if disagreements:
            print(f"  disagreements ({len(disagreements)}):")
            for word, expected, got in disagreements[:25]:
                print(f"    {word}: expected {expected}, got {got}")
        agreement = 1 - len(disagreements) / len(porter_pairs)
        assert agreement >= 0.99


def test_12_repository_checker(tmp_path):
    with criterion(12, "checker: intact zero, one corruption one violation"):
        gen = generate_corpus(
            tmp_path / "corpus",
            SynthParams(pages=60, cluster=15, bridge=1, sample=8, targets=2, seed=3),
        )
        graph_path = tmp_path / "graph.json"
        _build_graph(tmp_path / "corpus", graph_path)
        out = tmp_path / "run"
        run_crawl(_crawl_config(tmp_path / "corpus", graph_path, out, gen.seed_url,
                                max_pages=25))
        repo = Repository(out)
        assert repo.check_consistency() == []

        lines = repo.records_path.read_text().splitlines()
        corrupted = None
        for i, line in enumerate(lines):
            data = json.loads(line)
            if data["links"]:
                data["links"][0]["priority"] = 0.123456
                lines[i] = json.dumps(data, sort_keys=True)
                corrupted = i
                break
        assert corrupted is not None
        repo.records_path.write_text("\n".join(lines) + "\n")
        assert len(repo.check_consistency()) == 1
