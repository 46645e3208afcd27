"""Command line behavior: exit codes, output contracts, delegation."""

import json
import logging
import os
import re

import pytest

from rtopmap.bundle import load_bundle
from rtopmap.cli import main
from rtopmap.graph import build_graph, compute_stats, filter_graph
from rtopmap.ingest import default_vocabulary, dump_profiles, dump_universities, synth_corpus
from rtopmap.normalize import canonicalize
from rtopmap.overlay import citations_overlay, department_overlay, hr_overlay


@pytest.fixture(scope="module", autouse=True)
def fixed_epoch():
    old = os.environ.get("SOURCE_DATE_EPOCH")
    os.environ["SOURCE_DATE_EPOCH"] = "1700000000"
    yield
    if old is None:
        del os.environ["SOURCE_DATE_EPOCH"]
    else:
        os.environ["SOURCE_DATE_EPOCH"] = old


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    corpus = synth_corpus(11, 150, vocabulary=default_vocabulary(100, seed=3))
    root = tmp_path_factory.mktemp("data")
    profiles = root / "profiles.jsonl"
    universities = root / "universities.jsonl"
    profiles.write_text(dump_profiles(corpus.profiles))
    universities.write_text(dump_universities(corpus.universities))
    return profiles, universities, corpus


@pytest.fixture(scope="module")
def built(tmp_path_factory, data):
    profiles, universities, _ = data
    out = tmp_path_factory.mktemp("cli") / "bundle"
    rc = main(["build", "--profiles", str(profiles),
               "--universities", str(universities), "--out", str(out),
               "--seed", "7", "--min-node-weight", "2",
               "--min-edge-weight", "2", "--clusters", "6"])
    assert rc == 0
    return out


class TestBuild:
    def test_build_writes_bundle_and_timings(self, data, tmp_path, capsys):
        profiles, universities, _ = data
        out = tmp_path / "b"
        rc = main(["build", "--profiles", str(profiles),
                   "--universities", str(universities), "--out", str(out),
                   "--seed", "7", "--clusters", "6"])
        captured = capsys.readouterr()
        assert rc == 0
        assert load_bundle(out).manifest["config"]["seed"] == 7
        for stage in ("normalize", "graph", "layout", "clusters",
                      "countries", "levels", "write"):
            assert re.search(rf"{stage}\s+\d+\.\d+s", captured.out), stage

    def test_rerun_is_up_to_date(self, data, built, capsys):
        profiles, universities, _ = data
        before = (built / "manifest.json").read_bytes()
        rc = main(["build", "--profiles", str(profiles),
                   "--universities", str(universities), "--out", str(built),
                   "--seed", "7", "--min-node-weight", "2",
                   "--min-edge-weight", "2", "--clusters", "6"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "up-to-date" in captured.out
        assert (built / "manifest.json").read_bytes() == before

    def test_changed_flags_rebuild(self, data, tmp_path, capsys):
        profiles, universities, _ = data
        out = tmp_path / "b"
        args = ["build", "--profiles", str(profiles),
                "--universities", str(universities), "--out", str(out),
                "--clusters", "6"]
        assert main(args) == 0
        capsys.readouterr()
        assert main(args + ["--seed", "5"]) == 0
        captured = capsys.readouterr()
        assert "up-to-date" not in captured.out
        assert load_bundle(out).manifest["config"]["seed"] == 5

    def test_missing_input_exits_2_naming_path(self, tmp_path, capsys):
        missing = tmp_path / "nope.jsonl"
        with pytest.raises(SystemExit) as err:
            main(["build", "--profiles", str(missing),
                  "--out", str(tmp_path / "b")])
        assert err.value.code == 2
        assert str(missing) in capsys.readouterr().err

    def test_config_file_with_flag_override(self, data, tmp_path):
        profiles, universities, _ = data
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 9, "clusters": 4,
                                   "min_node_weight": 2}))
        out = tmp_path / "b"
        rc = main(["build", "--config", str(cfg),
                   "--profiles", str(profiles),
                   "--universities", str(universities),
                   "--out", str(out), "--seed", "7"])
        assert rc == 0
        config = load_bundle(out).manifest["config"]
        assert config["seed"] == 7  # flag beats config file
        assert config["clusters"] == 4
        assert config["min_node_weight"] == 2

    def test_variant_recorded(self, data, tmp_path):
        profiles, universities, _ = data
        out = tmp_path / "us"
        rc = main(["build", "--profiles", str(profiles),
                   "--universities", str(universities), "--out", str(out),
                   "--variant", "US", "--clusters", "4"])
        assert rc == 0
        assert load_bundle(out).manifest["variant"] == "US"


class TestStats:
    def test_triangle_clustering(self, tmp_path, capsys):
        profiles = tmp_path / "p.jsonl"
        profiles.write_text(json.dumps(
            {"id": "r1", "name": "r1", "uni": "u1", "cites": 9,
             "affiliation": "prof", "raw_topics": "aa, bb, cc"}) + "\n")
        rc = main(["stats", "--profiles", str(profiles)])
        captured = capsys.readouterr()
        assert rc == 0
        assert "clustering coefficient 1.000" in captured.out

    def test_json_matches_library(self, built, capsys):
        rc = main(["stats", "--bundle", str(built), "--format", "json"])
        captured = capsys.readouterr()
        assert rc == 0
        bundle = load_bundle(built)
        want = compute_stats(bundle.graph, bundle.corpus, seed=0)
        assert json.loads(captured.out) == json.loads(want.to_json())

    def test_json_deterministic(self, built, capsys):
        main(["stats", "--bundle", str(built), "--format", "json"])
        first = capsys.readouterr().out
        main(["stats", "--bundle", str(built), "--format", "json"])
        assert capsys.readouterr().out == first

    def test_profiles_route_equals_manual_pipeline(self, data, capsys):
        profiles, universities, corpus = data
        rc = main(["stats", "--profiles", str(profiles),
                   "--universities", str(universities),
                   "--format", "json"])
        captured = capsys.readouterr()
        assert rc == 0
        lexicon, annotated = canonicalize(corpus)
        g = filter_graph(build_graph(annotated, lexicon), 1, 1)
        want = compute_stats(g, annotated, seed=0)
        assert json.loads(captured.out) == json.loads(want.to_json())


class TestOverlayCommand:
    def test_citations(self, built, capsys):
        bundle = load_bundle(built)
        uni = bundle.corpus.profiles[0].university_id
        rc = main(["overlay", "citations", "--bundle", str(built),
                   "--university", uni])
        captured = capsys.readouterr()
        assert rc == 0
        want = citations_overlay(uni, bundle.corpus, mode="full")
        assert json.loads(captured.out) == want.to_json()

    def test_hr_with_base(self, built, capsys):
        bundle = load_bundle(built)
        uni = bundle.corpus.profiles[0].university_id
        rc = main(["overlay", "hr", "--bundle", str(built),
                   "--university", uni, "--base", "US"])
        captured = capsys.readouterr()
        assert rc == 0
        want = hr_overlay(uni, bundle.corpus, base="US")
        assert json.loads(captured.out) == want.to_json()

    def test_department(self, built, capsys):
        bundle = load_bundle(built)
        rc = main(["overlay", "department", "--bundle", str(built),
                   "--keyword", "computer"])
        captured = capsys.readouterr()
        assert rc == 0
        want = department_overlay("computer", bundle.corpus)
        assert json.loads(captured.out) == want.to_json()

    def test_document_from_file(self, built, tmp_path, capsys):
        bundle = load_bundle(built)
        doc = tmp_path / "doc.txt"
        doc.write_text("we study " + bundle.graph.nodes[0].label)
        rc = main(["overlay", "document", "--bundle", str(built),
                   "--file", str(doc)])
        captured = capsys.readouterr()
        assert rc == 0
        assert json.loads(captured.out)["kind"] == "DOCUMENT"

    def test_unknown_university_is_runtime_error(self, built, capsys):
        rc = main(["overlay", "citations", "--bundle", str(built),
                   "--university", "u999"])
        captured = capsys.readouterr()
        assert rc == 1
        assert "u999" in captured.err

    def test_missing_required_flag_is_usage_error(self, built):
        with pytest.raises(SystemExit) as err:
            main(["overlay", "citations", "--bundle", str(built)])
        assert err.value.code == 2


class TestServe:
    def test_missing_bundle_exits_2(self, tmp_path, capsys):
        missing = tmp_path / "absent"
        with pytest.raises(SystemExit) as err:
            main(["serve", "--bundle", str(missing)])
        assert err.value.code == 2
        assert str(missing) in capsys.readouterr().err

    def test_corrupt_bundle_names_digest(self, data, tmp_path, capsys):
        profiles, universities, _ = data
        out = tmp_path / "b"
        assert main(["build", "--profiles", str(profiles),
                     "--universities", str(universities),
                     "--out", str(out), "--clusters", "4"]) == 0
        target = out / "graph.json"
        target.write_text(target.read_text() + " ")
        capsys.readouterr()
        rc = main(["serve", "--bundle", str(out)])
        captured = capsys.readouterr()
        assert rc == 1
        assert "digest" in captured.err

    def test_serve_starts_on_requested_port(self, built, monkeypatch):
        calls = {}

        def fake_run(app, host, port, **kwargs):
            calls["host"], calls["port"] = host, port
            calls["routes"] = {r.path for r in app.routes}

        monkeypatch.setattr("uvicorn.run", fake_run)
        rc = main(["serve", "--bundle", str(built), "--port", "8123"])
        assert rc == 0
        assert calls["port"] == 8123
        assert "/api/manifest" in calls["routes"]


class TestSynth:
    def test_writes_loadable_corpus(self, tmp_path, capsys):
        profiles = tmp_path / "p.jsonl"
        universities = tmp_path / "u.jsonl"
        rc = main(["synth", "--seed", "11", "--profiles", "60",
                   "--out-profiles", str(profiles),
                   "--out-universities", str(universities)])
        captured = capsys.readouterr()
        assert rc == 0
        assert "60" in captured.out
        want = synth_corpus(11, 60)
        assert profiles.read_text() == dump_profiles(want.profiles)
        assert universities.read_text() == dump_universities(want.universities)


class TestLogging:
    def test_env_sets_package_log_level(self, built, monkeypatch, capsys):
        monkeypatch.setenv("RTOPMAP_LOG", "DEBUG")
        main(["stats", "--bundle", str(built), "--format", "json"])
        assert logging.getLogger("rtopmap").level == logging.DEBUG
