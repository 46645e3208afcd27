"""Operator entry point: build bundles, serve them, inspect graphs, run overlays."""

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import uvicorn

from .bundle import BuildConfig, BundleError, build_bundle, load_bundle
from .graph import build_graph, compute_stats, filter_graph
from .ingest import (
    default_vocabulary,
    dump_profiles,
    dump_universities,
    load_corpus,
    synth_corpus,
)
from .normalize import canonicalize
from .overlay import (
    BASE_SETS,
    citations_overlay,
    department_overlay,
    document_overlay,
    hr_overlay,
    normalized_citations_overlay,
)
from .server import create_app

log = logging.getLogger(__name__)

_BUILD_DEFAULTS = {
    "profiles": None,
    "universities": None,
    "out": None,
    "seed": 0,
    "min_node_weight": 1,
    "min_edge_weight": 1,
    "clusters": 16,
    "variant": "WORLD",
    "padding": 0.05,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _configure_logging():
    level = os.environ.get("RTOPMAP_LOG")
    if level:
        logging.basicConfig(level=level.upper())
        logging.getLogger("rtopmap").setLevel(level.upper())


def _existing_file(parser, path, what) -> Path:
    if path is None:
        parser.error(f"{what} is required")
    p = Path(path)
    if not p.is_file():
        parser.error(f"{what} not found: {p}")
    return p


def _merged_build_options(args, parser) -> dict:
    merged = dict(_BUILD_DEFAULTS)
    if args.config:
        path = _existing_file(parser, args.config, "config file")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            parser.error(f"config file {path} is not valid json: {e.msg}")
        unknown = set(loaded) - set(merged)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(loaded)
    # explicit flags beat config-file values
    for key in _BUILD_DEFAULTS:
        value = getattr(args, key)
        if value is not None:
            merged[key] = value
    return merged


def _bundle_current(out: Path, config: BuildConfig, sources: dict) -> bool:
    manifest_path = out / "manifest.json"
    if not manifest_path.is_file():
        return False
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return False
    if manifest.get("config_digest") != config.digest():
        return False
    if manifest.get("sources") != sources:
        return False
    try:
        load_bundle(out)
    except BundleError:
        return False
    return True


def run_build(args, parser) -> int:
    opts = _merged_build_options(args, parser)
    profiles = _existing_file(parser, opts["profiles"], "profiles file")
    universities = None
    if opts["universities"] is not None:
        universities = _existing_file(parser, opts["universities"],
                                      "universities file")
    if opts["out"] is None:
        parser.error("output directory is required")
    out = Path(opts["out"])

    try:
        config = BuildConfig(
            seed=opts["seed"], min_node_weight=opts["min_node_weight"],
            min_edge_weight=opts["min_edge_weight"],
            clusters=opts["clusters"], variant=opts["variant"],
            padding=opts["padding"]).validate()
    except (TypeError, ValueError) as e:
        parser.error(str(e))

    sources = {"profiles": _sha256(profiles),
               "universities": _sha256(universities) if universities else ""}
    if _bundle_current(out, config, sources):
        print(f"bundle at {out} is up-to-date; nothing to do")
        return 0

    corpus, errors = load_corpus(profiles, universities)
    for err in errors:
        log.warning("skipped record: %s", err)
    report = build_bundle(corpus, config, out, sources=sources)
    width = max(len(name) for name in report.timings)
    for name, seconds in report.timings.items():
        print(f"  {name:<{width}} {seconds:9.3f}s")
    c = report.counts
    print(f"bundle written to {report.path}: {c['topics']} topics, "
          f"{c['edges']} edges, from {c['profiles']} profiles")
    return 0


def run_serve(args, parser) -> int:
    bundle_dir = Path(args.bundle)
    if not bundle_dir.is_dir():
        parser.error(f"bundle not found: {bundle_dir}")
    bundle = load_bundle(bundle_dir)
    ui = args.ui
    if ui is None and Path("frontend/dist").is_dir():
        ui = "frontend/dist"
    app = create_app(bundle, static_dir=ui)
    print(f"serving {bundle_dir} on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _print_stats_text(g, stats):
    giant_nodes, giant_edges = stats.giant_component_size
    print(f"topics                 {len(g.nodes)}")
    print(f"edges                  {len(g.edges)}")
    print(f"components             {stats.component_count}")
    print(f"giant component        {giant_nodes} nodes, {giant_edges} edges")
    print(f"clustering coefficient {stats.global_clustering_coefficient:.3f}")
    if stats.average_shortest_path is None:
        print("average shortest path  n/a")
    else:
        print(f"average shortest path  {stats.average_shortest_path:.3f} "
              f"({stats.average_shortest_path_method})")
    labels = g.labels()
    tables = (("degree", stats.top_by_degree),
              ("researchers", stats.top_by_weight),
              ("citations per person", stats.top_by_citations_per_person))
    for title, table in tables:
        print(f"top by {title}:")
        for rank, (tid, value) in enumerate(table, start=1):
            print(f"  {rank:2d}. {labels[tid]:<42} {value:12.2f}")


def run_stats(args, parser) -> int:
    if (args.bundle is None) == (args.profiles is None):
        parser.error("stats needs exactly one of --bundle or --profiles")
    if args.bundle is not None:
        bundle = load_bundle(Path(args.bundle))
        g, corpus = bundle.graph, bundle.corpus
    else:
        profiles = _existing_file(parser, args.profiles, "profiles file")
        universities = None
        if args.universities is not None:
            universities = _existing_file(parser, args.universities,
                                          "universities file")
        raw, errors = load_corpus(profiles, universities)
        for err in errors:
            log.warning("skipped record: %s", err)
        lexicon, corpus = canonicalize(raw)
        g = filter_graph(build_graph(corpus, lexicon),
                         args.min_node_weight, args.min_edge_weight)
    stats = compute_stats(g, corpus, seed=args.seed)
    if args.format == "json":
        print(stats.to_json())
    else:
        _print_stats_text(g, stats)
    return 0


def run_overlay(args, parser) -> int:
    bundle_dir = Path(args.bundle)
    if not bundle_dir.is_dir():
        parser.error(f"bundle not found: {bundle_dir}")
    bundle = load_bundle(bundle_dir)
    corpus = bundle.corpus

    if args.kind in ("citations", "hr") and args.university is None:
        parser.error(f"{args.kind} overlay requires --university")
    if args.kind == "citations":
        if args.normalize == "none":
            result = citations_overlay(args.university, corpus,
                                       mode=args.mode)
        else:
            result = normalized_citations_overlay(
                args.university, corpus, base=args.base, mode=args.normalize)
    elif args.kind == "hr":
        result = hr_overlay(args.university, corpus, base=args.base)
    elif args.kind == "department":
        if args.keyword is None:
            parser.error("department overlay requires --keyword")
        result = department_overlay(args.keyword, corpus)
    else:
        if (args.file is None) == (args.text is None):
            parser.error("document overlay requires exactly one of "
                         "--file or --text")
        if args.text is not None:
            text = args.text
        elif args.file == "-":
            text = sys.stdin.read()
        else:
            text = _existing_file(parser, args.file,
                                  "document file").read_text(encoding="utf-8")
        result = document_overlay(text, bundle.lexicon)

    print(json.dumps(result.to_json(), sort_keys=True, ensure_ascii=False,
                     indent=1))
    return 0


def run_synth(args, parser) -> int:
    kwargs = {}
    if args.universities is not None:
        kwargs["n_universities"] = args.universities
    if args.topics is not None:
        kwargs["vocabulary"] = default_vocabulary(args.topics)
    corpus = synth_corpus(args.seed, args.profiles, **kwargs)
    out_profiles = Path(args.out_profiles)
    out_universities = Path(args.out_universities)
    out_profiles.write_text(dump_profiles(corpus.profiles), encoding="utf-8")
    out_universities.write_text(dump_universities(corpus.universities),
                                encoding="utf-8")
    print(f"wrote {len(corpus.profiles)} profiles to {out_profiles} and "
          f"{len(corpus.universities)} universities to {out_universities}")
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rtopmap",
        description="Research topic maps: build bundles, serve them, "
                    "inspect graphs, evaluate overlays.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a map bundle from profile records")
    b.add_argument("--profiles", help="researcher profiles, one json per line")
    b.add_argument("--universities", help="university records, one json per line")
    b.add_argument("--out", help="bundle output directory")
    b.add_argument("--config", help="json file supplying build keys; flags win")
    b.add_argument("--seed", type=int)
    b.add_argument("--min-node-weight", type=int)
    b.add_argument("--min-edge-weight", type=int)
    b.add_argument("--clusters", type=int)
    b.add_argument("--variant", choices=BASE_SETS)
    b.add_argument("--padding", type=float)
    b.set_defaults(func=run_build)

    s = sub.add_parser("serve", help="serve a bundle over http")
    s.add_argument("--bundle", required=True)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8080)
    s.add_argument("--ui", help="directory of static client assets")
    s.set_defaults(func=run_serve)

    st = sub.add_parser("stats", help="print topic graph statistics")
    st.add_argument("--bundle")
    st.add_argument("--profiles")
    st.add_argument("--universities")
    st.add_argument("--min-node-weight", type=int, default=1)
    st.add_argument("--min-edge-weight", type=int, default=1)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--format", choices=("text", "json"), default="text")
    st.set_defaults(func=run_stats)

    o = sub.add_parser("overlay", help="evaluate an overlay against a bundle")
    o.add_argument("kind", choices=("citations", "hr", "department",
                                    "document"))
    o.add_argument("--bundle", required=True)
    o.add_argument("--university")
    o.add_argument("--mode", choices=("full", "split"), default="full")
    o.add_argument("--normalize", choices=("none", "rate", "literal"),
                   default="none")
    o.add_argument("--base", choices=BASE_SETS, default="WORLD")
    o.add_argument("--keyword")
    o.add_argument("--file", help="document file, - for stdin")
    o.add_argument("--text", help="document text inline")
    o.set_defaults(func=run_overlay)

    sy = sub.add_parser("synth", help="generate a synthetic corpus")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--profiles", type=int, required=True,
                    help="number of researcher profiles")
    sy.add_argument("--universities", type=int,
                    help="number of universities")
    sy.add_argument("--topics", type=int,
                    help="vocabulary size")
    sy.add_argument("--out-profiles", required=True)
    sy.add_argument("--out-universities", required=True)
    sy.set_defaults(func=run_synth)

    return parser


def main(argv=None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    _configure_logging()
    try:
        return args.func(args, parser)
    except Exception as e:  # runtime failure: diagnostic and exit 1
        log.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
