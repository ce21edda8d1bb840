import json
import subprocess
import sys

import pytest

from hedonet.cli import main
from hedonet.pipeline import read_json

from synthetic import planted_corpus, write_daily_lists, write_jsonl, write_lexicon


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    favor, against, lex, hubs = planted_corpus(n_pos=300, n_neg=300, seed=5)
    write_jsonl(favor + against, d / "merged.jsonl")
    write_lexicon(lex, d / "lex.tsv")
    write_daily_lists(hubs, d / "daily")
    (d / "plain.txt").write_text("\n".join(x["text"] for x in favor[:50]) + "\n")
    return d


def common(d, out):
    return ["--corpus", str(d / "merged.jsonl"), "--lexicon", str(d / "lex.tsv"), "--daily-lists", str(d / "daily"), "--out", str(out)]


def test_run_and_compare(inputs, tmp_path, capsys):
    args = common(inputs, tmp_path / "r1") + ["--seed", "4", "--null-model", "shuffle,uniform", "--sweep", "1,0.1", "--control-replicates", "30"]
    assert main(["run"] + args) == 0
    s = read_json(tmp_path / "r1/run_summary.json")
    assert sorted(s["null_models"]) == ["shuffled_scores", "uniform_scores"]
    assert s["config"]["sweep"] == [1.0, 0.1]
    assert main(["run"] + common(inputs, tmp_path / "r2") + ["--null-model", "none"]) == 0
    assert main(["compare", str(tmp_path / "r1"), str(tmp_path / "r2"), "--out", str(tmp_path / "cmp")]) == 0
    assert (tmp_path / "cmp/comparison.csv").exists()


def test_compare_single_run_is_config_error(inputs, tmp_path):
    main(["run"] + common(inputs, tmp_path / "r") + ["--null-model", "none"])
    assert main(["compare", str(tmp_path / "r"), "--out", str(tmp_path / "c")]) == 2


def test_missing_lexicon_exit_2_and_no_output(inputs, tmp_path):
    out = tmp_path / "o"
    code = main(["run", "--corpus", str(inputs / "merged.jsonl"), "--lexicon", str(tmp_path / "missing.tsv"), "--out", str(out)])
    assert code == 2 and not out.exists()


def test_bad_lexicon_exit_3(inputs, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("word\thapps\tstddev\nx\tabc\t1\n")
    assert main(["run", "--corpus", str(inputs / "merged.jsonl"), "--lexicon", str(bad), "--out", str(tmp_path / "o")]) == 3


def test_duplicate_ids_exit_3(tmp_path):
    c = tmp_path / "c.jsonl"
    c.write_text(json.dumps({"id": "1", "text": "a b"}) + "\n" + json.dumps({"id": "1", "text": "c"}) + "\n")
    assert main(["ingest", "--corpus", str(c), "--out", str(tmp_path / "o")]) == 3


def test_stage_subcommands(inputs, tmp_path, capsys):
    out = tmp_path / "st"
    base = ["--out", str(out)]
    assert main(["ingest", "--corpus", str(inputs / "plain.txt"), "--input-format", "txt"] + base) == 0
    assert main(["graph", "--lexicon", str(inputs / "lex.tsv")] + base) == 0
    assert main(["nullmodel", "--null-model", "er", "--replicates", "2", "--seed", "3"] + base) == 0
    assert (out / "nullmodels/erdos_renyi/rep_001/edges.tsv").exists()
    assert main(["backbone", "--backbone", "nc", "--delta", "1", "--sweep", ""] + base) == 0
    assert main(["community", "--seed", "2", "--min-community-size", "3"] + base) == 0
    assert (out / "community/communities.tsv").exists()
    capsys.readouterr()


def test_graph_without_ingest_is_error(inputs, tmp_path):
    assert main(["graph", "--lexicon", str(inputs / "lex.tsv"), "--out", str(tmp_path / "o")]) in (2, 3)


def test_config_file_and_precedence(inputs, tmp_path, monkeypatch):
    cfg = {
        "corpus": "merged.jsonl",
        "lexicon": "lex.tsv",
        "daily_lists": "daily",
        "alpha": 0.2,
        "null_models": [],
        "sweep": [],
        "output_dir": str(tmp_path / "from_config"),
    }
    path = inputs / "cfg.json"
    path.write_text(json.dumps(cfg))
    monkeypatch.setenv("HEDONET_OUTPUT", str(tmp_path / "from_env"))
    assert main(["run", "--config", str(path), "--alpha", "0.1"]) == 0
    s = read_json(tmp_path / "from_env/run_summary.json")
    assert s["config"]["alpha"] == 0.1
    assert not (tmp_path / "from_config").exists()
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "flag"), "--null-model", "none"]) == 0
    assert read_json(tmp_path / "flag/run_summary.json")["config"]["alpha"] == 0.2


def test_unknown_config_key_exit_2(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"alhpa": 1}))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_invalid_alpha_exit_2(inputs, tmp_path):
    assert main(["run"] + common(inputs, tmp_path / "o") + ["--alpha", "2"]) == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "hedonet", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "hedonet" in r.stdout
