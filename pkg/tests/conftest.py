import sys
from pathlib import Path

import numpy as np
import pytest

from hedonet.corpus import ParserConfig, RawDocument, parse_corpus
from hedonet.graph import WeightedGraph, build_graph
from hedonet.lexicon import Lexicon, LexiconEntry

HERE = Path(__file__).parent
DATA = HERE / "data"
sys.path.insert(0, str(HERE))

import synthetic  # noqa: E402

# PASS/FAIL lines recorded by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def corpus_of(*texts, anchors=()):
    docs = [RawDocument(f"d{i}", t) for i, t in enumerate(texts)]
    return parse_corpus(docs, ParserConfig.build(anchors))


def graph_of(edges, scores=None, counts=None):
    nodes = sorted({u for u, v, _ in edges} | {v for u, v, _ in edges} | set(scores or {}) | set(counts or {}))
    sc = [scores.get(w, np.nan) for w in nodes] if scores else None
    wc = [counts.get(w, 1) for w in nodes] if counts else [1] * len(nodes)
    return WeightedGraph.from_edges(nodes, edges, word_count=wc, tweet_count=wc, score=sc)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def zipf_graph():
    """10^4 Zipf-sampled documents scored with a labMT-like lexicon."""
    docs, lexd = synthetic.zipf_corpus(n_docs=10_000, seed=0)
    corpus = parse_corpus([RawDocument(d["id"], d["text"]) for d in docs], ParserConfig.build())
    lex = Lexicon({w: LexiconEntry(h, 1.0) for w, h in lexd.items()}, {})
    return build_graph(corpus, lex)


@pytest.fixture(scope="session")
def planted_files(tmp_path_factory):
    """Merged favor/against corpus with planted positive and negative themes."""
    d = tmp_path_factory.mktemp("planted_full")
    favor, against, lex, hubs = synthetic.planted_corpus(seed=0)
    synthetic.write_jsonl(favor + against, d / "merged.jsonl")
    synthetic.write_lexicon(lex, d / "lex.tsv")
    synthetic.write_daily_lists(hubs, d / "daily")
    return d


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
