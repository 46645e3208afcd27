"""Weighted topic co-occurrence graph and its network statistics."""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass
from itertools import combinations
from math import ceil, sqrt

import numpy as np

from .ingest import Corpus


@dataclass
class TopicNode:
    topic_id: str
    label: str
    weight: int


@dataclass
class TopicGraph:
    nodes: list[TopicNode]
    edges: list[tuple[str, str, int]]  # u < v, undirected

    def node_weights(self) -> dict[str, int]:
        return {n.topic_id: n.weight for n in self.nodes}

    def labels(self) -> dict[str, str]:
        return {n.topic_id: n.label for n in self.nodes}

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {n.topic_id: set() for n in self.nodes}
        for u, v, _ in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def to_json(self) -> str:
        payload = {
            "nodes": [
                {"id": n.topic_id, "label": n.label, "weight": n.weight}
                for n in sorted(self.nodes, key=lambda n: n.topic_id)
            ],
            "edges": [[u, v, w] for u, v, w in sorted(self.edges)],
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "TopicGraph":
        payload = json.loads(text)
        return cls(
            nodes=[TopicNode(r["id"], r["label"], r["weight"])
                   for r in payload["nodes"]],
            edges=[(u, v, w) for u, v, w in payload["edges"]],
        )


def build_graph(corpus: Corpus, lexicon) -> TopicGraph:
    """Count listing and co-listing profiles per topic.

    Node weight is the number of profiles listing the topic; edge weight
    the number listing both endpoints. Profiles carry deduplicated topic
    id lists, so self-loops and double counting cannot occur.
    """
    node_w: Counter[str] = Counter()
    edge_w: Counter[tuple[str, str]] = Counter()
    for p in corpus.profiles:
        topics = sorted(set(p.topics))
        node_w.update(topics)
        for u, v in combinations(topics, 2):
            edge_w[(u, v)] += 1
    labels = lexicon.topics
    nodes = [TopicNode(t, labels.get(t, t), w)
             for t, w in sorted(node_w.items())]
    edges = [(u, v, w) for (u, v), w in sorted(edge_w.items())]
    return TopicGraph(nodes=nodes, edges=edges)


def filter_graph(g: TopicGraph, min_node_weight: int, min_edge_weight: int) -> TopicGraph:
    """Drop light nodes (with incident edges), then light edges.

    Nodes isolated by edge filtering stay: they still label the map.
    """
    kept = {n.topic_id for n in g.nodes if n.weight >= min_node_weight}
    nodes = [n for n in g.nodes if n.topic_id in kept]
    edges = [(u, v, w) for u, v, w in g.edges
             if w >= min_edge_weight and u in kept and v in kept]
    return TopicGraph(nodes=nodes, edges=edges)


@dataclass
class GraphStats:
    component_count: int
    giant_component_size: tuple[int, int]  # (nodes, edges)
    degree_distribution: dict[int, int]
    global_clustering_coefficient: float
    average_shortest_path: float | None
    average_shortest_path_method: str | None
    top_by_degree: list[tuple[str, float]]
    top_by_weight: list[tuple[str, float]]
    top_by_citations_per_person: list[tuple[str, float]]

    def to_json(self) -> str:
        path = None
        if self.average_shortest_path is not None:
            path = {"value": self.average_shortest_path,
                    "method": self.average_shortest_path_method}
        payload = {
            "component_count": self.component_count,
            "giant_component": {"nodes": self.giant_component_size[0],
                                "edges": self.giant_component_size[1]},
            "degree_distribution": {str(d): c for d, c
                                    in sorted(self.degree_distribution.items())},
            "global_clustering_coefficient": self.global_clustering_coefficient,
            "average_shortest_path": path,
            "top_by_degree": [[t, v] for t, v in self.top_by_degree],
            "top_by_weight": [[t, v] for t, v in self.top_by_weight],
            "top_by_citations_per_person": [[t, v] for t, v
                                            in self.top_by_citations_per_person],
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=1)


def _bfs_distances(adj: dict[str, set[str]], src: str) -> dict[str, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _components(adj: dict[str, set[str]]) -> list[list[str]]:
    seen: set[str] = set()
    comps: list[list[str]] = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = sorted(_bfs_distances(adj, start))
        seen.update(comp)
        comps.append(comp)
    return comps


def _top10(values: dict[str, float]) -> list[tuple[str, float]]:
    ranked = sorted(values.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:10]


def compute_stats(g: TopicGraph, corpus: Corpus, seed: int = 0,
                  exact_limit: int = 2000,
                  min_sample_pairs: int = 10000) -> GraphStats:
    """Connectivity, clustering, path length, and top-topic tables.

    The clustering coefficient is closed triples over connected triples.
    Average shortest path is exact (all reachable pairs, all-pairs BFS)
    up to exact_limit nodes; above that it is estimated from at least
    min_sample_pairs uniformly sampled pairs inside the giant component
    and flagged "sampled".
    """
    adj = g.adjacency()
    n = len(adj)
    comps = _components(adj)
    giant = max(comps, key=len) if comps else []
    giant_set = set(giant)
    giant_edges = sum(1 for u, v, _ in g.edges if u in giant_set)

    degree_distribution = dict(Counter(len(adj[v]) for v in adj))

    closed = sum(len(adj[u] & adj[v]) for u, v, _ in g.edges)
    connected = sum(len(nbrs) * (len(nbrs) - 1) // 2 for nbrs in adj.values())
    coefficient = (closed / connected) if connected else 0.0

    avg_path: float | None = None
    method: str | None = None
    if g.edges:
        if n <= exact_limit:
            total = 0
            count = 0
            for src in adj:
                for dst, d in _bfs_distances(adj, src).items():
                    if src < dst:
                        total += d
                        count += 1
            if count:
                avg_path = total / count
                method = "exact"
        elif len(giant) >= 2:
            rng = np.random.default_rng(seed)
            n_sources = ceil(sqrt(min_sample_pairs))
            per_source = ceil(min_sample_pairs / n_sources)
            total = 0
            count = 0
            src_idx = rng.integers(0, len(giant), size=n_sources)
            for si in src_idx:
                src = giant[int(si)]
                dist = _bfs_distances(adj, src)
                tgt_idx = rng.integers(0, len(giant), size=per_source)
                for ti in tgt_idx:
                    dst = giant[int(ti)]
                    if dst == src:
                        continue
                    total += dist[dst]
                    count += 1
            avg_path = total / count
            method = "sampled"

    weight = g.node_weights()
    cites: dict[str, int] = {t: 0 for t in weight}
    for p in corpus.profiles:
        for t in p.topics:
            if t in cites:
                cites[t] += p.total_citations
    per_person = {t: cites[t] / weight[t] for t in weight if weight[t] > 0}

    return GraphStats(
        component_count=len(comps),
        giant_component_size=(len(giant), giant_edges),
        degree_distribution=degree_distribution,
        global_clustering_coefficient=coefficient,
        average_shortest_path=avg_path,
        average_shortest_path_method=method,
        top_by_degree=_top10({v: float(len(adj[v])) for v in adj}),
        top_by_weight=_top10({t: float(w) for t, w in weight.items()}),
        top_by_citations_per_person=_top10(per_person),
    )
