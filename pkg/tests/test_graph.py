import math
from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hedonet.graph import (
    WeightedGraph,
    assortativity,
    build_graph,
    components,
    degree_strength,
    graph_summary,
    read_graph,
    weighted_mean_score,
    write_graph,
)
from hedonet.histograms import BinSpec, HistogramGrid, score_pair_grid, score_profiles
from hedonet.lexicon import Lexicon, LexiconEntry

from conftest import corpus_of, graph_of


def dense_oracle(corpus):
    """Binarized document-term matrix times its transpose, diagonal zeroed."""
    vocab = sorted(corpus.tweet_counts)
    idx = {w: i for i, w in enumerate(vocab)}
    X = np.zeros((len(corpus.documents), len(vocab)), dtype=np.int64)
    for d, doc in enumerate(corpus.documents):
        for t in doc.tokens:
            X[d, idx[t]] = 1
    A = X.T @ X
    np.fill_diagonal(A, 0)
    return vocab, A


def adjacency(g):
    A = np.zeros((g.n_nodes, g.n_nodes), dtype=np.int64)
    A[g.src, g.dst] = g.weight
    A[g.dst, g.src] = g.weight
    return A


def test_two_document_example():
    g = build_graph(corpus_of("a b c", "b c d"))
    assert dict(((u, v), w) for u, v, w in g.edge_list()) == {
        ("a", "b"): 1,
        ("a", "c"): 1,
        ("b", "c"): 2,
        ("b", "d"): 1,
        ("c", "d"): 1,
    }
    assert dict(zip(g.nodes, g.strength.tolist())) == {"a": 2, "b": 4, "c": 4, "d": 2}
    assert degree_strength(g)["b"] == (3, 4)


def test_self_pairs_excluded():
    g = build_graph(corpus_of("a a a"))
    assert g.nodes == ("a",) and g.n_edges == 0


def test_repeated_documents_accumulate():
    g = build_graph(corpus_of("a b", "a b", "a b"))
    assert g.weight_between("a", "b") == 3 == g.weight_between("b", "a")


def test_isolated_and_single_edge():
    g = graph_of([("a", "b", 5)], counts={"z": 1})
    ds = degree_strength(g)
    assert ds["z"] == (0, 0) and ds["a"] == (1, 5)


def test_components():
    tri = [("a", "b", 1), ("b", "c", 1), ("a", "c", 1)]
    tri2 = [("x", "y", 1), ("y", "z", 1), ("x", "z", 1)]
    assert components(graph_of(tri + tri2)) == [3, 3]
    assert components(graph_of([("a", "b", 1), ("b", "c", 1)], counts={"d": 1})) == [3, 1]
    assert components(WeightedGraph.from_edges([], [])) == []


def test_self_loop_rejected():
    with pytest.raises(Exception):
        WeightedGraph.from_edges(["a"], [("a", "a", 1)])


def test_assortativity_equal_attributes():
    g = graph_of([("a", "b", 1), ("c", "d", 2)], scores={"a": 3, "b": 3, "c": 7, "d": 7})
    assert assortativity(g, "score") == pytest.approx(1.0)
    assert assortativity(g, "score", weighted=True) == pytest.approx(1.0)


def test_star_degree_assortativity():
    g = graph_of([("hub", f"l{i}", 1) for i in range(5)])
    assert assortativity(g, "degree") == pytest.approx(-1.0)


def test_assortativity_undefined():
    assert assortativity(graph_of([("a", "b", 1)]), "degree") is None
    g = graph_of([("a", "b", 1), ("b", "c", 1)], scores={"a": 5, "b": 5, "c": 5})
    assert assortativity(g, "score") is None


def random_graph(rng, n=30, p=0.2):
    edges = [(f"n{i}", f"n{j}", int(rng.integers(1, 6))) for i, j in combinations(range(n), 2) if rng.random() < p]
    scores = {f"n{i}": float(rng.uniform(1, 9)) for i in range(n) if rng.random() < 0.8}
    return graph_of(edges, scores=scores)


@pytest.mark.parametrize("seed", range(5))
def test_assortativity_against_networkx(seed):
    g = random_graph(np.random.default_rng(seed))
    G = g.to_networkx()
    assert assortativity(g, "degree") == pytest.approx(nx.degree_pearson_correlation_coefficient(G), abs=1e-10)
    assert assortativity(g, "strength") == pytest.approx(
        nx.degree_pearson_correlation_coefficient(G, weight="weight"), abs=1e-10
    )
    scored = [n for n, d in G.nodes(data=True) if not math.isnan(d.get("h", math.nan))]
    H = G.subgraph(scored)
    assert assortativity(g, "score") == pytest.approx(nx.numeric_assortativity_coefficient(H, "h"), abs=1e-10)


@pytest.mark.parametrize("seed", range(3))
def test_weighted_score_assortativity_by_expansion(seed):
    # Oracle: replicate every oriented endpoint pair `weight` times and take plain Pearson.
    g = random_graph(np.random.default_rng(seed))
    xs, ys = [], []
    for u, v, w in zip(g.src.tolist(), g.dst.tolist(), g.weight.tolist()):
        hu, hv = g.score[u], g.score[v]
        if math.isnan(hu) or math.isnan(hv):
            continue
        xs += [hu, hv] * w
        ys += [hv, hu] * w
    assert assortativity(g, "score", weighted=True) == pytest.approx(np.corrcoef(xs, ys)[0, 1], abs=1e-10)


def test_permuted_scores_centered_at_zero():
    rng = np.random.default_rng(11)
    g = random_graph(rng, n=60, p=0.15)
    vals = []
    base = np.array([rng.uniform(1, 9) for _ in range(g.n_nodes)])
    for _ in range(300):
        vals.append(assortativity(g.with_scores(rng.permutation(base)), "score"))
    vals = np.array(vals)
    assert abs(vals.mean()) < 3 * vals.std() / math.sqrt(len(vals)) + 0.02


def words(n):
    return [chr(ord("a") + i) for i in range(n)]


doc_lists = st.lists(st.lists(st.sampled_from(words(12)), max_size=20), max_size=50)


@settings(max_examples=150, deadline=None)
@given(doc_lists)
def test_matches_dense_matrix_product(docs):
    c = corpus_of(*(" ".join(d) for d in docs))
    g = build_graph(c)
    vocab, A = dense_oracle(c)
    assert list(g.nodes) == vocab
    assert np.array_equal(adjacency(g), A)


@settings(max_examples=100, deadline=None)
@given(doc_lists, st.randoms(use_true_random=False))
def test_invariant_under_permutations(docs, rnd):
    g1 = build_graph(corpus_of(*(" ".join(d) for d in docs)))
    shuffled = [rnd.sample(d, len(d)) for d in docs]
    rnd.shuffle(shuffled)
    g2 = build_graph(corpus_of(*(" ".join(d) for d in shuffled)))
    assert g1.edge_list() == g2.edge_list()


@settings(max_examples=100, deadline=None)
@given(doc_lists)
def test_weight_and_strength_identities(docs):
    c = corpus_of(*(" ".join(d) for d in docs))
    g = build_graph(c)
    assert g.total_weight == sum(math.comb(len(d.unique_tokens), 2) for d in c.documents)
    assert int(g.strength.sum()) == 2 * g.total_weight
    assert np.all(g.degree <= g.strength)
    tc = dict(zip(g.nodes, g.tweet_count.tolist()))
    for u, v, w in g.edge_list():
        assert w <= min(tc[u], tc[v])
    assert sum(components(g)) == g.n_nodes


def test_score_pair_symmetrized_single_edge():
    g = graph_of([("u", "v", 2)], scores={"u": 3.0, "v": 7.0})
    grid = score_pair_grid(g, BinSpec(score=np.arange(1.0, 9.5, 1.0)))
    expected = np.zeros((8, 8))
    expected[2, 6] = expected[6, 2] = 2
    assert np.array_equal(grid.values, expected)


def test_neutral_deviation_grid_zero():
    g = graph_of([("a", "b", 1), ("b", "c", 3)], scores={"a": 5, "b": 5, "c": 5}, counts={"a": 2, "b": 9, "c": 4})
    assert not score_profiles(g)["deviation_score"].values.any()


def test_profiles_against_brute_force_recount():
    texts = ["love the laughter", "the terrorist", "love love vote the", "unscored the words"]
    c = corpus_of(*texts)
    lex = Lexicon(
        {
            "love": LexiconEntry(8.42, 1),
            "the": LexiconEntry(4.98, 1),
            "laughter": LexiconEntry(8.5, 1),
            "terrorist": LexiconEntry(1.3, 1),
            "vote": LexiconEntry(5.9, 1),
        },
        {},
    )
    bins = BinSpec()
    grids = score_profiles(build_graph(c), lex, bins)
    # Recount straight from token lists.
    N, pairs = {}, {}
    for t in texts:
        toks = t.split()
        for w in toks:
            N[w] = N.get(w, 0) + 1
        for a, b in combinations(sorted(set(toks)), 2):
            pairs[a, b] = pairs.get((a, b), 0) + 1
    scored = {w: lex.score_of(w) for w in N if lex.score_of(w) is not None}
    total = sum(N[w] for w in scored)
    sb, cb = bins.score, bins.count_edges

    def b(v, e):
        return min(max(int(np.searchsorted(e, v, side="right")) - 1, 0), len(e) - 2)

    count = np.zeros(grids["count_score"].values.shape)
    dev = np.zeros_like(count)
    for w, h in scored.items():
        count[b(h, sb), b(N[w], cb)] += 1
        dev[b(h, sb), b(N[w], cb)] += (h - 5) * N[w] / total
    pair = np.zeros(grids["score_pair"].values.shape)
    for (u, v), w in pairs.items():
        if u in scored and v in scored:
            pair[b(scored[u], sb), b(scored[v], sb)] += w
            pair[b(scored[v], sb), b(scored[u], sb)] += w
    assert np.array_equal(grids["count_score"].values, count)
    assert np.allclose(grids["deviation_score"].values, dev, atol=1e-15)
    assert np.array_equal(grids["score_pair"].values, pair)
    assert grids["count_score"].skipped == 2


def test_grid_csv_roundtrip(tmp_path):
    g = graph_of([("u", "v", 2), ("v", "w", 1)], scores={"u": 3.0, "v": 7.0, "w": 5.5})
    grid = score_profiles(g)["score_pair"]
    grid.to_csv(tmp_path / "g.csv")
    back = HistogramGrid.from_csv(tmp_path / "g.csv")
    assert np.array_equal(back.values, grid.values)
    assert np.array_equal(back.x_edges, grid.x_edges) and back.x_label == grid.x_label


def test_graph_io_roundtrip(tmp_path):
    g = random_graph(np.random.default_rng(3))
    write_graph(g, tmp_path)
    back = read_graph(tmp_path)
    assert back.nodes == g.nodes and back.edge_list() == g.edge_list()
    assert np.array_equal(back.score, g.score, equal_nan=True)
    assert np.array_equal(back.word_count, g.word_count)
    G = nx.read_graphml(tmp_path / "graph.graphml")
    assert G.number_of_edges() == g.n_edges


def test_summary_recount_from_files(tmp_path):
    c = corpus_of("a b c", "b c d", "e")
    g = build_graph(c)
    write_graph(g, tmp_path, graphml=False)
    s = graph_summary(g, len(c))
    rows = [l.split("\t") for l in (tmp_path / "edges.tsv").read_text().splitlines()[1:]]
    nodes = (tmp_path / "nodes.tsv").read_text().splitlines()[1:]
    assert s["edges"] == len(rows) and s["nodes"] == len(nodes)
    assert s["total_edge_weight"] == sum(int(r[2]) for r in rows)
    assert s["component_sizes"] == [[4, 1], [1, 1]]


def test_weighted_mean_ignores_unscored():
    assert weighted_mean_score([3.0, math.nan, 7.0], [1, 100, 3]) == pytest.approx(6.0)
    assert weighted_mean_score([math.nan], [3]) is None
