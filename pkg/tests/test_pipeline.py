import filecmp
import json
import os
from pathlib import Path

import numpy as np
import pytest

from hedonet.errors import ConfigError, DataError
from hedonet.graph import components
from hedonet.histograms import BinSpec
from hedonet.pipeline import (
    PipelineConfig,
    compare_corpora,
    derive_seed,
    read_json,
    run_pipeline,
    stage_backbone,
    stage_community,
    stage_graph,
    stage_ingest,
)
from hedonet.graph import read_graph

from synthetic import planted_corpus, write_daily_lists, write_jsonl, write_lexicon


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    d = tmp_path_factory.mktemp("planted")
    favor, against, lex, hubs = planted_corpus(n_pos=500, n_neg=500, seed=3)
    write_jsonl(favor + against, d / "merged.jsonl")
    write_jsonl(favor, d / "favor.jsonl")
    write_jsonl(against, d / "against.jsonl")
    write_lexicon(lex, d / "lex.tsv")
    write_daily_lists(hubs, d / "daily")
    return d


def config(d, out, **kw):
    base = dict(
        corpus=d / "merged.jsonl",
        lexicon=d / "lex.tsv",
        daily_lists=d / "daily",
        output_dir=out,
        seed=1,
        control_replicates=40,
        sweep=(1.0, 0.5, 0.05),
    )
    base.update(kw)
    return PipelineConfig.from_mapping(base)


def tree(root):
    return sorted(str(p.relative_to(root)) for p in Path(root).rglob("*") if p.is_file())


def assert_same_tree(a, b):
    ta, tb = tree(a), tree(b)
    assert ta == tb
    _, mismatch, errors = filecmp.cmpfiles(a, b, ta, shallow=False)
    assert mismatch == [] and errors == []


@pytest.fixture(scope="module")
def run_dir(planted, tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "out"
    run_pipeline(config(planted, out))
    return out


def test_run_is_deterministic(planted, run_dir, tmp_path):
    run_pipeline(config(planted, tmp_path / "again"))
    assert_same_tree(run_dir, tmp_path / "again")


def test_different_seed_changes_null_models(planted, run_dir, tmp_path):
    run_pipeline(config(planted, tmp_path / "s2", seed=2))
    a = (run_dir / "nullmodels/configuration/rep_000/edges.tsv").read_bytes()
    b = (tmp_path / "s2/nullmodels/configuration/rep_000/edges.tsv").read_bytes()
    assert a != b


def test_summary_recount_from_files(run_dir):
    s = read_json(run_dir / "run_summary.json")
    g = read_graph(run_dir / "graph")
    edges = (run_dir / "graph/edges.tsv").read_text().splitlines()[1:]
    nodes = (run_dir / "graph/nodes.tsv").read_text().splitlines()[1:]
    docs = (run_dir / "corpus/parsed.jsonl").read_text().splitlines()
    assert s["corpus"]["documents"] == len(docs)
    assert s["corpus"]["nodes"] == len(nodes) == g.n_nodes
    assert s["corpus"]["edges"] == len(edges)
    assert s["corpus"]["total_edge_weight"] == sum(int(l.split("\t")[2]) for l in edges)
    sizes = components(g)
    assert sum(n * k for n, k in s["corpus"]["component_sizes"]) == sum(sizes)
    assert s["backbone"]["graph"]["nodes"] == len((run_dir / "backbone/nodes.tsv").read_text().splitlines()) - 1


def test_no_absolute_paths_or_wallclock(run_dir):
    text = (run_dir / "run_summary.json").read_text()
    assert str(run_dir.parent) not in text
    assert read_json(run_dir / "run_summary.json")["timestamp"] is None


def test_timestamp_from_source_date_epoch(planted, tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    s = run_pipeline(config(planted, tmp_path / "t", null_models=(), sweep=()))
    assert s["timestamp"].startswith("1970-01-01")


def test_manifest_complete(run_dir):
    m = read_json(run_dir / "manifest.json")
    expected_classes = 8 + 3 * 4 + 5
    assert len(m) == expected_classes
    for cls, files in m.items():
        assert files, cls
        for f in files:
            assert (run_dir / f).is_file()


def test_seed_scheme_recorded(run_dir):
    s = read_json(run_dir / "run_summary.json")
    assert s["seeds"]["root"] == 1
    assert s["seeds"]["louvain"] == derive_seed(1, "louvain")
    assert "PCG64" in s["seeds"]["bit_generator"]


def test_derive_seed_distinct():
    seeds = {derive_seed(1, "nullmodel", i) for i in range(4)} | {derive_seed(1, "louvain"), derive_seed(1, "control")}
    assert len(seeds) == 6
    assert derive_seed(1, "louvain") == derive_seed(1, "louvain")


def test_stages_are_checkpointable(planted, run_dir, tmp_path):
    out = tmp_path / "staged"
    cfg = config(planted, out)
    stage_ingest(cfg)
    stage_graph(cfg)
    stage_backbone(cfg)
    stage_community(cfg)
    for sub in ("corpus", "graph", "backbone", "sweep", "community"):
        assert_same_tree(run_dir / sub, out / sub)
    # rerun one stage in place from the emitted intermediates
    stage_community(cfg)
    assert_same_tree(run_dir / "community", out / "community")


def test_missing_lexicon_is_config_error(planted, tmp_path):
    out = tmp_path / "x"
    with pytest.raises(ConfigError):
        run_pipeline(config(planted, out, lexicon=tmp_path / "nope.tsv"))
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_data_error_leaves_no_output(planted, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("word\thapps\tstddev\nx\t12\t1\n")
    out = tmp_path / "x"
    with pytest.raises(DataError, match="stage graph"):
        run_pipeline(config(planted, out, lexicon=bad))
    assert not out.exists()
    assert sorted(p.name for p in tmp_path.iterdir()) == ["bad.tsv"]


def test_refuses_foreign_nonempty_output(planted, tmp_path):
    out = tmp_path / "occupied"
    out.mkdir()
    (out / "precious.txt").write_text("keep me")
    with pytest.raises(ConfigError):
        run_pipeline(config(planted, out))
    assert (out / "precious.txt").read_text() == "keep me"


@pytest.mark.parametrize(
    "kw",
    [
        {"alpha": 0.0},
        {"alpha": 1.5},
        {"delta": -1},
        {"backbone": "mst"},
        {"null_models": ("bogus",)},
        {"sweep": (0.0,)},
        {"replicates": 0},
        {"input_format": "xml"},
        {"resolution": 0},
    ],
)
def test_invalid_config(planted, tmp_path, kw):
    with pytest.raises(ConfigError):
        config(planted, tmp_path / "o", **kw).validate()


def test_unknown_config_key():
    with pytest.raises(ConfigError):
        PipelineConfig.from_mapping({"alhpa": 0.1})


def test_bad_bins():
    with pytest.raises(ConfigError):
        PipelineConfig.from_mapping({"bins": {"score": [1, 1, 2], "log_count": [0, 1]}})


def test_noise_corrected_and_unfiltered_backbones(planted, tmp_path):
    nc = run_pipeline(config(planted, tmp_path / "nc", backbone="nc", null_models=(), sweep=()))
    none = run_pipeline(config(planted, tmp_path / "none", backbone="none", null_models=(), sweep=()))
    assert nc["backbone"]["method"] == "noise_corrected"
    assert none["backbone"]["graph"]["edges"] == none["backbone"]["hub_removal"]["edges"]
    assert nc["backbone"]["graph"]["edges"] <= none["backbone"]["graph"]["edges"]


def test_require_scores_drops_unscored(planted, tmp_path):
    lex = tmp_path / "partial.tsv"
    rows = (planted / "lex.tsv").read_text().splitlines()
    lex.write_text("\n".join(rows[: len(rows) // 2]) + "\n")
    loose = run_pipeline(config(planted, tmp_path / "a", lexicon=lex, null_models=(), sweep=()))
    strict = run_pipeline(config(planted, tmp_path / "b", lexicon=lex, null_models=(), sweep=(), require_scores=True))
    assert loose["corpus"]["score_coverage"] < 1.0
    assert strict["corpus"]["score_coverage"] == 1.0
    assert strict["corpus"]["nodes"] < loose["corpus"]["nodes"]


def test_compare_identical_runs_zero_delta(run_dir):
    s = read_json(run_dir / "run_summary.json")
    rows = compare_corpora([s, s], ["a", "b"])
    for k, v in rows[1].items():
        if k.startswith("delta_") and v is not None:
            assert v == 0


def test_compare_needs_two_and_same_bins(run_dir):
    s = read_json(run_dir / "run_summary.json")
    with pytest.raises(ConfigError):
        compare_corpora([s])
    other = dict(s, bins=BinSpec(score=np.linspace(1, 9, 9)).to_dict())
    with pytest.raises(ConfigError):
        compare_corpora([s, other])


def test_compare_flags_only_merged(planted, run_dir, tmp_path):
    runs = [read_json(run_dir / "run_summary.json")]
    for name in ("favor", "against"):
        runs.append(run_pipeline(config(planted, tmp_path / name, corpus=planted / f"{name}.jsonl", null_models=(), sweep=())))
    rows = compare_corpora(runs, ["merged", "favor", "against"])
    assert [r["opposing_sentiment"] for r in rows] == [True, False, False]
