"""Co-occurrence graph construction, filtering, and network statistics.

Stats are checked against O(n^3) enumeration and networkx recomputation;
graph construction against a nested-loop pair-counting oracle.
"""

import itertools
import math
import random
from collections import Counter

import networkx as nx
import pytest

from rtopmap.graph import TopicGraph, TopicNode, build_graph, compute_stats, filter_graph
from rtopmap.ingest import Corpus, ResearcherProfile, synth_corpus
from rtopmap.normalize import canonicalize


def corpus_with_topics(topic_lists):
    profiles = [
        ResearcherProfile(f"r{i}", "", "u1", 0, "", "", sorted(set(ts)))
        for i, ts in enumerate(topic_lists)
    ]
    return Corpus(profiles=profiles, universities=[])


def labels_for(topic_lists):
    names = sorted({t for ts in topic_lists for t in ts})
    return {t: t for t in names}


class FakeLexicon:
    def __init__(self, topics):
        self.topics = topics


def graph_of(topic_lists):
    return build_graph(corpus_with_topics(topic_lists),
                       FakeLexicon(labels_for(topic_lists)))


def simple_graph(nodes, edges):
    return TopicGraph(
        nodes=[TopicNode(n, n, 1) for n in nodes],
        edges=[(min(u, v), max(u, v), 1) for u, v in edges],
    )


def oracle_counts(topic_lists):
    node_w = Counter()
    edge_w = Counter()
    for ts in topic_lists:
        ts = sorted(set(ts))
        for t in ts:
            node_w[t] += 1
        for u, v in itertools.combinations(ts, 2):
            edge_w[(u, v)] += 1
    return node_w, edge_w


class TestBuildGraph:
    def test_direct_count(self):
        g = graph_of([["a", "b"], ["a", "b"], ["a", "c"]])
        weights = {n.topic_id: n.weight for n in g.nodes}
        assert weights == {"a": 3, "b": 2, "c": 1}
        assert sorted(g.edges) == [("a", "b", 2), ("a", "c", 1)]

    def test_single_topic_profiles_edgeless(self):
        g = graph_of([["a"], ["b"], ["a"]])
        assert g.edges == []
        assert {n.topic_id: n.weight for n in g.nodes} == {"a": 2, "b": 1}

    def test_no_self_loops_or_duplicates(self):
        g = graph_of([["a", "a", "b"]])
        assert all(u != v for u, v, _ in g.edges)
        pairs = [(u, v) for u, v, _ in g.edges]
        assert len(pairs) == len(set(pairs))
        assert all(u < v for u, v in pairs)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_pairwise_oracle(self, seed):
        corpus = synth_corpus(seed=seed, n_profiles=200)
        lexicon, annotated = canonicalize(corpus)
        g = build_graph(annotated, lexicon)
        node_w, edge_w = oracle_counts([p.topics for p in annotated.profiles])
        assert {n.topic_id: n.weight for n in g.nodes} == dict(node_w)
        assert {(u, v): w for u, v, w in g.edges} == dict(edge_w)

    def test_permutation_invariant(self):
        corpus = synth_corpus(seed=4, n_profiles=120)
        lexicon, annotated = canonicalize(corpus)
        g1 = build_graph(annotated, lexicon)
        shuffled = Corpus(profiles=list(reversed(annotated.profiles)),
                          universities=annotated.universities)
        g2 = build_graph(shuffled, lexicon)
        assert g1.to_json() == g2.to_json()

    def test_edge_weight_bounded_by_endpoints(self):
        corpus = synth_corpus(seed=9, n_profiles=300)
        lexicon, annotated = canonicalize(corpus)
        g = build_graph(annotated, lexicon)
        w = {n.topic_id: n.weight for n in g.nodes}
        assert all(ew <= min(w[u], w[v]) for u, v, ew in g.edges)

    def test_export_round_trip(self):
        g = graph_of([["a", "b"], ["b", "c"], ["a"]])
        again = TopicGraph.from_json(g.to_json())
        assert again.to_json() == g.to_json()


class TestFilterGraph:
    def test_identity_thresholds(self):
        g = graph_of([["a", "b"], ["a", "c"]])
        f = filter_graph(g, 1, 1)
        assert f.to_json() == g.to_json()

    def test_node_threshold(self):
        g = TopicGraph(
            nodes=[TopicNode("a", "a", 5), TopicNode("b", "b", 2)],
            edges=[("a", "b", 2)],
        )
        f = filter_graph(g, 3, 1)
        assert [n.topic_id for n in f.nodes] == ["a"]
        assert f.edges == []

    def test_isolated_nodes_retained(self):
        g = TopicGraph(
            nodes=[TopicNode("a", "a", 5), TopicNode("b", "b", 5)],
            edges=[("a", "b", 1)],
        )
        f = filter_graph(g, 1, 2)
        assert [n.topic_id for n in f.nodes] == ["a", "b"]
        assert f.edges == []

    def test_filter_then_count_oracle(self):
        corpus = synth_corpus(seed=6, n_profiles=400)
        lexicon, annotated = canonicalize(corpus)
        g = build_graph(annotated, lexicon)
        f = filter_graph(g, 3, 2)
        kept = {n.topic_id for n in g.nodes if n.weight >= 3}
        want_edges = sorted((u, v, w) for u, v, w in g.edges
                            if w >= 2 and u in kept and v in kept)
        assert {n.topic_id for n in f.nodes} == kept
        assert sorted(f.edges) == want_edges

    def test_monotone_in_thresholds(self):
        corpus = synth_corpus(seed=7, n_profiles=250)
        lexicon, annotated = canonicalize(corpus)
        g = build_graph(annotated, lexicon)
        prev_nodes, prev_edges = math.inf, math.inf
        for mn, me in [(1, 1), (2, 1), (2, 2), (3, 2), (4, 3)]:
            f = filter_graph(g, mn, me)
            assert len(f.nodes) <= prev_nodes
            assert len(f.edges) <= prev_edges
            prev_nodes, prev_edges = len(f.nodes), len(f.edges)


def random_test_graph(seed, n=60, p=0.06):
    rnd = random.Random(seed)
    nodes = [f"n{i:03d}" for i in range(n)]
    edges = [(u, v) for u, v in itertools.combinations(nodes, 2)
             if rnd.random() < p]
    return simple_graph(nodes, edges)


def oracle_clustering(g):
    adj = {n.topic_id: set() for n in g.nodes}
    for u, v, _ in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    ids = sorted(adj)
    triangles = sum(
        1 for a, b, c in itertools.combinations(ids, 3)
        if b in adj[a] and c in adj[a] and c in adj[b]
    )
    triples = sum(len(adj[v]) * (len(adj[v]) - 1) // 2 for v in ids)
    return (3.0 * triangles / triples) if triples else 0.0


def as_nx(g):
    h = nx.Graph()
    h.add_nodes_from(n.topic_id for n in g.nodes)
    h.add_edges_from((u, v) for u, v, _ in g.edges)
    return h


def oracle_avg_path(g):
    h = as_nx(g)
    dists = []
    for comp in nx.connected_components(h):
        sub = h.subgraph(comp)
        for src, lengths in nx.all_pairs_shortest_path_length(sub):
            for dst, d in lengths.items():
                if src < dst:
                    dists.append(d)
    return (sum(dists) / len(dists)) if dists else None


class TestComputeStats:
    def test_triangle(self):
        g = simple_graph(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")])
        s = compute_stats(g, Corpus([], []))
        assert s.global_clustering_coefficient == 1.0
        assert s.average_shortest_path == 1.0
        assert s.average_shortest_path_method == "exact"
        assert s.component_count == 1

    def test_path_graph(self):
        g = simple_graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
        s = compute_stats(g, Corpus([], []))
        assert s.global_clustering_coefficient == 0.0
        assert s.average_shortest_path == pytest.approx(4.0 / 3.0)

    def test_edgeless_path_absent(self):
        g = simple_graph(["a", "b"], [])
        s = compute_stats(g, Corpus([], []))
        assert s.average_shortest_path is None
        assert s.component_count == 2

    @pytest.mark.parametrize("seed", [1, 2, 3, 4])
    def test_clustering_matches_enumeration(self, seed):
        g = random_test_graph(seed)
        s = compute_stats(g, Corpus([], []))
        assert s.global_clustering_coefficient == pytest.approx(
            oracle_clustering(g), abs=1e-12)
        assert s.global_clustering_coefficient == pytest.approx(
            nx.transitivity(as_nx(g)), abs=1e-12)

    @pytest.mark.parametrize("seed", [5, 6])
    def test_exact_path_matches_bfs_oracle(self, seed):
        g = random_test_graph(seed, n=80, p=0.05)
        s = compute_stats(g, Corpus([], []))
        assert s.average_shortest_path_method == "exact"
        assert s.average_shortest_path == pytest.approx(oracle_avg_path(g))

    def test_components_and_degrees(self):
        g = simple_graph(["a", "b", "c", "d", "e"],
                         [("a", "b"), ("b", "c"), ("d", "e")])
        s = compute_stats(g, Corpus([], []))
        assert s.component_count == 2
        assert s.giant_component_size == (3, 2)
        assert s.degree_distribution == {1: 4, 2: 1}
        assert sum(s.degree_distribution.values()) == 5

    def test_sampled_path_close_to_exact(self):
        g = random_test_graph(9, n=150, p=0.05)
        exact = compute_stats(g, Corpus([], []))
        sampled = compute_stats(g, Corpus([], []), exact_limit=50,
                                min_sample_pairs=20000, seed=3)
        assert sampled.average_shortest_path_method == "sampled"
        # sampling is restricted to the giant component
        h = as_nx(g)
        giant = max(nx.connected_components(h), key=len)
        sub = h.subgraph(giant)
        giant_exact = sum(
            d for src, lengths in nx.all_pairs_shortest_path_length(sub)
            for dst, d in lengths.items() if src < dst
        ) / (len(giant) * (len(giant) - 1) / 2)
        assert sampled.average_shortest_path == pytest.approx(giant_exact, rel=0.05)
        assert exact.average_shortest_path_method == "exact"

    def test_top_tables(self):
        profiles = [
            ResearcherProfile("r1", "", "u1", 100, "", "", ["a", "b"]),
            ResearcherProfile("r2", "", "u1", 50, "", "", ["a"]),
            ResearcherProfile("r3", "", "u1", 10, "", "", ["b", "c"]),
        ]
        corpus = Corpus(profiles=profiles, universities=[])
        g = graph_of([p.topics for p in profiles])
        s = compute_stats(g, corpus)
        assert s.top_by_weight[0] == ("a", 2)
        assert s.top_by_degree[0][1] == 2  # b touches a and c
        cpp = dict(s.top_by_citations_per_person)
        assert cpp["a"] == pytest.approx(150 / 2)
        assert cpp["b"] == pytest.approx(110 / 2)
        assert cpp["c"] == pytest.approx(10 / 1)

    def test_stats_export_is_json(self):
        import json
        g = random_test_graph(11)
        s = compute_stats(g, Corpus([], []))
        payload = json.loads(s.to_json())
        assert payload["component_count"] == s.component_count
        assert payload["average_shortest_path"]["method"] == "exact"
