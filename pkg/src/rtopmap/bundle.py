"""Build, validate, and query on-disk map bundles.

A bundle is a directory of static JSON artifacts: the manifest with
content digests, the filtered topic graph, geometry (positions,
clusters, country polygons), one file per zoom level, the topic
lexicon, and the annotated source records. Everything a server or
client needs is read from here; nothing is recomputed at query time
except overlays.
"""

import dataclasses
import hashlib
import json
import os
import shutil
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .countries import build_countries, color_countries
from .graph import TopicGraph, build_graph, filter_graph
from .ingest import Corpus, dump_profiles, dump_universities, load_corpus
from .layout import cluster_nodes, embed, remove_overlaps
from .lod import compute_levels
from .normalize import TopicLexicon, canonicalize
from .overlay import BASE_SETS

FORMAT = "rtopmap-bundle/1"


class BundleError(Exception):
    """A bundle directory is missing, incomplete, or corrupt."""


@dataclass(frozen=True)
class BuildConfig:
    seed: int = 0
    min_node_weight: int = 1
    min_edge_weight: int = 1
    clusters: int = 16
    levels: int = 8
    variant: str = "WORLD"
    padding: float = 0.05

    def validate(self) -> "BuildConfig":
        if self.levels != 8:
            raise ValueError(f"levels must be 8, got {self.levels}")
        if self.min_node_weight < 1 or self.min_edge_weight < 1:
            raise ValueError("weight thresholds must be at least 1")
        if self.clusters < 1:
            raise ValueError(f"clusters must be at least 1, got {self.clusters}")
        if self.variant not in BASE_SETS:
            raise ValueError(
                f"variant must be one of {BASE_SETS}, got {self.variant!r}")
        if not 0 < self.padding < 1:
            raise ValueError(f"padding must be in (0, 1), got {self.padding}")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class BuildReport:
    path: Path
    timings: dict[str, float]
    counts: dict[str, int]


@dataclass
class Bundle:
    path: Path
    manifest: dict
    graph: TopicGraph
    lexicon: TopicLexicon
    geometry: dict
    levels: list[dict]
    corpus: Corpus
    first_level: dict[str, int] = field(default_factory=dict)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=1)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _created_at() -> str:
    # SOURCE_DATE_EPOCH pins the timestamp for reproducible builds
    stamp = os.environ.get("SOURCE_DATE_EPOCH")
    ts = int(stamp) if stamp else int(time.time())
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


def _variant_profiles(corpus: Corpus, variant: str) -> list:
    if variant == "WORLD":
        return list(corpus.profiles)
    regions = {u.university_id: u.region for u in corpus.universities}
    return [p for p in corpus.profiles
            if regions.get(p.university_id) == variant]


def build_bundle(corpus: Corpus, config: BuildConfig, out_dir,
                 sources: dict | None = None) -> BuildReport:
    """Run the full pipeline and write the bundle atomically.

    All stages run before anything touches disk; the artifacts land in
    a temporary sibling directory that is renamed over the target only
    once complete, so a failed build leaves no partial output. sources
    may carry digests of the input files for freshness checks later.
    """
    config.validate()
    out = Path(out_dir)
    timings: dict[str, float] = {}

    def stage(name):
        timings[name] = time.perf_counter()
        return name

    def done(name):
        timings[name] = time.perf_counter() - timings[name]

    stage("normalize")
    source = Corpus(profiles=_variant_profiles(corpus, config.variant),
                    universities=list(corpus.universities))
    lexicon, annotated = canonicalize(source)
    done("normalize")

    stage("graph")
    g = filter_graph(build_graph(annotated, lexicon),
                     config.min_node_weight, config.min_edge_weight)
    if not g.nodes:
        raise BundleError("no topics survive the weight thresholds")
    done("graph")

    stage("layout")
    embedding = remove_overlaps(embed(g, seed=config.seed))
    done("layout")

    stage("clusters")
    k = min(config.clusters, len(g.nodes))
    clusters = cluster_nodes(embedding, k, seed=config.seed)
    done("clusters")

    stage("countries")
    countries = build_countries(embedding, clusters, padding=config.padding)
    countries.colors = color_countries(countries.polygons)
    done("countries")

    stage("levels")
    views = compute_levels(g, embedding, n_levels=config.levels)
    done("levels")

    stage("write")
    geometry = {
        "positions": {t: [x, y] for t, (x, y) in embedding.positions.items()},
        "clusters": clusters,
        "countries": [
            {"cluster": cid, "color": list(countries.colors[cid]),
             "rings": [[[x, y] for x, y in ring] for ring in rings]}
            for cid, rings in sorted(countries.polygons.items())
        ],
    }
    labels = g.labels()
    level_payloads = []
    for view in views:
        vis = sorted(view.visible)
        shown = set(vis)
        level_payloads.append({
            "level": view.level,
            "visible": [
                {"id": t, "x": view.positions[t][0], "y": view.positions[t][1],
                 "label": labels[t], "font": view.font_size[t],
                 "cluster": clusters[t]}
                for t in vis
            ],
            "edges": [[u, v, w] for u, v, w in sorted(g.edges)
                      if u in shown and v in shown],
        })

    counts = {
        "profiles": len(annotated.profiles),
        "universities": len(corpus.universities),
        "topics": len(g.nodes),
        "edges": len(g.edges),
        "clusters": k,
    }

    tmp = out.parent / f".{out.name}.tmp{os.getpid()}"
    try:
        if tmp.exists():
            shutil.rmtree(tmp)
        (tmp / "levels").mkdir(parents=True)
        (tmp / "graph.json").write_text(g.to_json(), encoding="utf-8")
        (tmp / "lexicon.json").write_text(lexicon.to_json(), encoding="utf-8")
        (tmp / "geometry.json").write_text(_dump(geometry), encoding="utf-8")
        for payload in level_payloads:
            (tmp / "levels" / f"{payload['level']}.json").write_text(
                _dump(payload), encoding="utf-8")
        (tmp / "profiles.jsonl").write_text(
            dump_profiles(annotated.profiles), encoding="utf-8")
        (tmp / "universities.jsonl").write_text(
            dump_universities(corpus.universities), encoding="utf-8")

        files = {
            p.relative_to(tmp).as_posix(): _sha256(p)
            for p in sorted(tmp.rglob("*")) if p.is_file()
        }
        manifest = {
            "format": FORMAT,
            "created_at": _created_at(),
            "config": config.to_dict(),
            "config_digest": config.digest(),
            "variant": config.variant,
            "counts": counts,
            "sources": dict(sources or {}),
            "files": files,
        }
        (tmp / "manifest.json").write_text(_dump(manifest), encoding="utf-8")

        out.parent.mkdir(parents=True, exist_ok=True)
        if out.exists():
            shutil.rmtree(out)
        tmp.rename(out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    done("write")

    return BuildReport(path=out, timings=timings, counts=counts)


def load_bundle(path) -> Bundle:
    """Read a bundle directory, verifying digests and coverage."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise BundleError(f"no manifest at {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise BundleError(f"manifest is not valid json: {e.msg}") from e

    if manifest.get("format") != FORMAT:
        raise BundleError(f"unsupported bundle format {manifest.get('format')!r}")
    config = BuildConfig(**manifest["config"])
    if manifest.get("config_digest") != config.digest():
        raise BundleError("config digest mismatch in manifest")

    required = {"graph.json", "lexicon.json", "geometry.json",
                "profiles.jsonl", "universities.jsonl"}
    required.update(f"levels/{z}.json" for z in range(1, config.levels + 1))
    files = manifest.get("files", {})
    missing = required - set(files)
    if missing:
        raise BundleError(f"manifest lists no digest for {sorted(missing)}")
    for rel, digest in sorted(files.items()):
        target = root / rel
        if not target.is_file():
            raise BundleError(f"bundle file missing: {rel}")
        if _sha256(target) != digest:
            raise BundleError(f"digest mismatch for {rel}")

    graph = TopicGraph.from_json((root / "graph.json").read_text(encoding="utf-8"))
    lexicon = TopicLexicon.from_json(
        (root / "lexicon.json").read_text(encoding="utf-8"))
    geometry = json.loads((root / "geometry.json").read_text(encoding="utf-8"))
    levels = [
        json.loads((root / "levels" / f"{z}.json").read_text(encoding="utf-8"))
        for z in range(1, config.levels + 1)
    ]
    corpus, errors = load_corpus(root / "profiles.jsonl",
                                 root / "universities.jsonl", strict=False)
    if errors:
        raise BundleError(f"corrupt records in bundle: {errors[0].message}")

    ids = {n.topic_id for n in graph.nodes}
    for key in ("positions", "clusters"):
        if set(geometry.get(key, {})) != ids:
            raise BundleError(f"geometry {key} do not cover the graph")
    first_level: dict[str, int] = {}
    for view in levels:
        for entry in view["visible"]:
            if entry["id"] not in ids:
                raise BundleError(f"level {view['level']} shows unknown "
                                  f"node {entry['id']!r}")
            first_level.setdefault(entry["id"], view["level"])
    if set(first_level) != ids:
        raise BundleError("some nodes never become visible")

    return Bundle(path=root, manifest=manifest, graph=graph, lexicon=lexicon,
                  geometry=geometry, levels=levels, corpus=corpus,
                  first_level=first_level)


def search(q: str, bundle: Bundle, limit: int = 10) -> list[dict]:
    """Case-insensitive all-words label search, heaviest topics first."""
    words = q.lower().split()
    if not words:
        return []
    hits = []
    for node in bundle.graph.nodes:
        label = node.label.lower()
        if all(w in label for w in words):
            hits.append(node)
    hits.sort(key=lambda n: (-n.weight, n.topic_id))
    results = []
    for node in hits[:limit]:
        x, y = bundle.geometry["positions"][node.topic_id]
        results.append({
            "topic_id": node.topic_id,
            "label": node.label,
            "x": x,
            "y": y,
            "weight": node.weight,
            "first_level": bundle.first_level[node.topic_id],
        })
    return results


def node_info(topic_id: str, bundle: Bundle) -> dict:
    """Detail record for one topic: position, cluster, weighted neighbors."""
    labels = bundle.graph.labels()
    if topic_id not in labels:
        raise KeyError(topic_id)
    weights = bundle.graph.node_weights()
    neighbors = []
    for u, v, w in bundle.graph.edges:
        if u == topic_id:
            neighbors.append({"topic_id": v, "label": labels[v], "weight": w})
        elif v == topic_id:
            neighbors.append({"topic_id": u, "label": labels[u], "weight": w})
    neighbors.sort(key=lambda r: (-r["weight"], r["topic_id"]))
    x, y = bundle.geometry["positions"][topic_id]
    return {
        "topic_id": topic_id,
        "label": labels[topic_id],
        "weight": weights[topic_id],
        "x": x,
        "y": y,
        "cluster": bundle.geometry["clusters"][topic_id],
        "first_level": bundle.first_level[topic_id],
        "neighbors": neighbors,
    }
