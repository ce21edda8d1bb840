"""
Undirected weighted word co-occurrence graph.

Nodes are words, kept in sorted order. Edges are stored once with
``src < dst`` (node indices) and sorted by ``(src, dst)``; the weight of an
edge is the number of documents whose token sets contain both words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .corpus import Corpus
from .errors import DataError
from .lexicon import NEUTRAL, Lexicon


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    nodes: tuple[str, ...]
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    word_count: np.ndarray
    tweet_count: np.ndarray
    score: np.ndarray  # NaN where the word has no score

    def __post_init__(self):
        for name in ("src", "dst", "weight", "word_count", "tweet_count", "score"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_edges(
        cls,
        nodes: Sequence[str],
        edges: Iterable[tuple[str, str, int]],
        word_count=None,
        tweet_count=None,
        score=None,
    ) -> "WeightedGraph":
        """Build from word-labelled edges; attributes are per-node sequences aligned with ``nodes``."""
        order = sorted(range(len(nodes)), key=lambda i: nodes[i])
        names = tuple(nodes[i] for i in order)
        if len(set(names)) != len(names):
            raise DataError("duplicate node names")
        index = {w: i for i, w in enumerate(names)}
        acc: dict[tuple[int, int], int] = {}
        for u, v, w in edges:
            if u == v:
                raise DataError(f"self-loop on {u!r}")
            i, j = index[u], index[v]
            key = (i, j) if i < j else (j, i)
            acc[key] = acc.get(key, 0) + int(w)

        def _attr(values, dtype, default):
            if values is None:
                return np.full(len(names), default, dtype=dtype)
            values = list(values)
            return np.array([values[i] for i in order], dtype=dtype)

        return cls._from_pairs(
            names,
            acc,
            _attr(word_count, np.int64, 0),
            _attr(tweet_count, np.int64, 0),
            _attr(score, np.float64, math.nan),
        )

    @classmethod
    def _from_pairs(cls, names, acc: dict, word_count, tweet_count, score) -> "WeightedGraph":
        if acc:
            keys = sorted(acc)
            src = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
            dst = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
            wt = np.fromiter((acc[k] for k in keys), dtype=np.int64, count=len(keys))
        else:
            src = dst = wt = np.zeros(0, dtype=np.int64)
        return cls(tuple(names), src, dst.copy(), wt, word_count, tweet_count, score)

    # -- basic accessors -----------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.weight)

    @property
    def total_weight(self) -> int:
        return int(self.weight.sum())

    @cached_property
    def index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.nodes)}

    @cached_property
    def _edge_lookup(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): k for k, (a, b) in enumerate(zip(self.src, self.dst))}

    def weight_between(self, u: str, v: str) -> int:
        i, j = self.index.get(u), self.index.get(v)
        if i is None or j is None or i == j:
            return 0
        k = self._edge_lookup.get((min(i, j), max(i, j)))
        return 0 if k is None else int(self.weight[k])

    def edges(self):
        """Iterate ``(u, v, weight)`` with ``u < v`` alphabetically."""
        for a, b, w in zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()):
            yield self.nodes[a], self.nodes[b], w

    def edge_list(self) -> list[tuple[str, str, int]]:
        return list(self.edges())

    @cached_property
    def degree(self) -> np.ndarray:
        n = self.n_nodes
        return np.bincount(self.src, minlength=n) + np.bincount(self.dst, minlength=n)

    @cached_property
    def strength(self) -> np.ndarray:
        n = self.n_nodes
        return np.bincount(self.src, weights=self.weight, minlength=n).astype(np.int64) + np.bincount(
            self.dst, weights=self.weight, minlength=n
        ).astype(np.int64)

    @property
    def scored(self) -> np.ndarray:
        return ~np.isnan(self.score)

    def neighbors(self) -> list[dict[int, int]]:
        adj: list[dict[int, int]] = [{} for _ in range(self.n_nodes)]
        for a, b, w in zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()):
            adj[a][b] = w
            adj[b][a] = w
        return adj

    # -- derived graphs ------------------------------------------------------

    def with_scores(self, score) -> "WeightedGraph":
        score = np.asarray(score, dtype=np.float64)
        if score.shape != (self.n_nodes,):
            raise ValueError("score vector has wrong length")
        return replace(self, score=score.copy())

    def with_lexicon(self, lex: Lexicon) -> "WeightedGraph":
        return self.with_scores(lex.scores(self.nodes))

    def with_edges(self, src, dst, weight) -> "WeightedGraph":
        """Same nodes and attributes, new edge set (``src < dst`` assumed, sorted here)."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.int64)
        order = np.lexsort((dst, src))
        return replace(
            self,
            src=src[order].copy(),
            dst=dst[order].copy(),
            weight=weight[order].copy(),
            word_count=self.word_count.copy(),
            tweet_count=self.tweet_count.copy(),
            score=self.score.copy(),
        )

    def subgraph(self, node_mask=None, edge_mask=None) -> "WeightedGraph":
        """Keep nodes where ``node_mask`` and edges where ``edge_mask`` (and both endpoints kept)."""
        n = self.n_nodes
        node_mask = np.ones(n, dtype=bool) if node_mask is None else np.asarray(node_mask, dtype=bool)
        edge_mask = np.ones(self.n_edges, dtype=bool) if edge_mask is None else np.asarray(edge_mask, dtype=bool)
        edge_mask = edge_mask & node_mask[self.src] & node_mask[self.dst]
        remap = np.cumsum(node_mask) - 1
        keep = np.flatnonzero(node_mask)
        return WeightedGraph(
            tuple(self.nodes[i] for i in keep),
            remap[self.src[edge_mask]].astype(np.int64),
            remap[self.dst[edge_mask]].astype(np.int64),
            self.weight[edge_mask].copy(),
            self.word_count[keep].copy(),
            self.tweet_count[keep].copy(),
            self.score[keep].copy(),
        )

    def drop_isolated(self, only=None) -> "WeightedGraph":
        """Remove degree-0 nodes; if ``only`` is a mask, restrict removal to those nodes."""
        isolated = self.degree == 0
        if only is not None:
            isolated &= np.asarray(only, dtype=bool)
        if not isolated.any():
            return self
        return self.subgraph(node_mask=~isolated)

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        for i, w in enumerate(self.nodes):
            attrs = {"N": int(self.word_count[i]), "tweet_count": int(self.tweet_count[i])}
            if not math.isnan(self.score[i]):
                attrs["h"] = float(self.score[i])
            G.add_node(w, **attrs)
        G.add_weighted_edges_from(self.edges())
        return G


# --- construction -------------------------------------------------------------


def build_graph(corpus: Corpus, lex: Optional[Lexicon] = None) -> WeightedGraph:
    """Superpose one clique per document over its unique tokens.

    Each document adds 1 to the weight of every unordered pair of distinct
    words it contains. Words that only ever appear alone become isolated
    nodes.
    """
    names = tuple(sorted(corpus.tweet_counts))
    index = {w: i for i, w in enumerate(names)}
    acc: dict[tuple[int, int], int] = {}
    get = acc.get
    for doc in corpus.documents:
        ids = sorted(index[t] for t in doc.unique_tokens)
        for pair in combinations(ids, 2):
            acc[pair] = get(pair, 0) + 1
    wc = np.array([corpus.word_counts[w] for w in names], dtype=np.int64)
    tc = np.array([corpus.tweet_counts[w] for w in names], dtype=np.int64)
    score = np.array(lex.scores(names) if lex is not None else [math.nan] * len(names), dtype=np.float64)
    return WeightedGraph._from_pairs(names, acc, wc, tc, score)


def degree_strength(g: WeightedGraph) -> dict[str, tuple[int, int]]:
    return {w: (int(k), int(s)) for w, k, s in zip(g.nodes, g.degree, g.strength)}


def component_labels(g: WeightedGraph) -> np.ndarray:
    n = g.n_nodes
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    A = coo_matrix((np.ones(g.n_edges), (g.src, g.dst)), shape=(n, n))
    _, labels = connected_components(A, directed=False)
    return labels


def components(g: WeightedGraph) -> list[int]:
    """Connected component sizes, largest first."""
    labels = component_labels(g)
    if len(labels) == 0:
        return []
    return sorted(np.bincount(labels).tolist(), reverse=True)


# --- scalar statistics ----------------------------------------------------------


def weighted_mean_score(score, counts) -> Optional[float]:
    """Count-weighted mean over scored entries; None when nothing is scored.

    Uses exactly rounded sums so the result does not depend on ordering.
    """
    score = np.asarray(score, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    ok = ~np.isnan(score)
    total = math.fsum(counts[ok].tolist())
    if total <= 0:
        return None
    return math.fsum((score[ok] * counts[ok]).tolist()) / total


def deviation_weights(score, counts) -> np.ndarray:
    """Per-word ``(h - 5) * N / sum(N)`` with the sum over scored words; NaN where unscored."""
    score = np.asarray(score, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    ok = ~np.isnan(score)
    total = math.fsum(counts[ok].tolist())
    out = np.full(len(score), math.nan)
    if total > 0:
        out[ok] = (score[ok] - NEUTRAL) * counts[ok] / total
    return out


def _weighted_pearson(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> Optional[float]:
    W = math.fsum(w.tolist())
    mx = math.fsum((w * x).tolist()) / W
    my = math.fsum((w * y).tolist()) / W
    dx, dy = x - mx, y - my
    sxy = math.fsum((w * dx * dy).tolist())
    sxx = math.fsum((w * dx * dx).tolist())
    syy = math.fsum((w * dy * dy).tolist())
    if sxx <= 0 or syy <= 0:
        return None
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def assortativity(g: WeightedGraph, attribute: str = "degree", weighted: bool = False) -> Optional[float]:
    """Pearson correlation of a node attribute across edge endpoints.

    Every edge contributes both orientations; with ``weighted`` each
    orientation counts ``weight`` times. Returns None when fewer than two
    usable edges remain or either side has zero variance. The choice of
    sample vs. population normalisation cancels out of the ratio.
    """
    if attribute == "degree":
        values = g.degree.astype(np.float64)
    elif attribute == "strength":
        values = g.strength.astype(np.float64)
    elif attribute == "score":
        values = g.score
    else:
        raise ValueError(f"unknown attribute {attribute!r}")
    a, b = values[g.src], values[g.dst]
    ok = ~(np.isnan(a) | np.isnan(b))
    if ok.sum() < 2:
        return None
    a, b = a[ok], b[ok]
    w = g.weight[ok].astype(np.float64) if weighted else np.ones(len(a))
    return _weighted_pearson(np.concatenate([a, b]), np.concatenate([b, a]), np.concatenate([w, w]))


def assortativity_table(g: WeightedGraph) -> dict[str, Optional[float]]:
    return {
        "strength": assortativity(g, "strength", weighted=False),
        "degree": assortativity(g, "degree", weighted=False),
        "score_weighted": assortativity(g, "score", weighted=True),
        "score_unweighted": assortativity(g, "score", weighted=False),
    }


def graph_summary(g: WeightedGraph, n_documents: Optional[int] = None) -> dict:
    sizes = components(g)
    return {
        "documents": n_documents,
        "nodes": g.n_nodes,
        "edges": g.n_edges,
        "total_edge_weight": g.total_weight,
        "component_sizes": compress_sizes(sizes),
        "n_components": len(sizes),
        "scored_nodes": int(g.scored.sum()),
        "score_coverage": (float(g.scored.sum()) / g.n_nodes) if g.n_nodes else None,
        "token_coverage": _token_coverage(g),
        "mean_score": weighted_mean_score(g.score, g.word_count),
    }


def _token_coverage(g: WeightedGraph) -> Optional[float]:
    total = int(g.word_count.sum())
    if total == 0:
        return None
    return int(g.word_count[g.scored].sum()) / total


def compress_sizes(sizes: Sequence[int]) -> list[list[int]]:
    """Run-length encode a descending size list as ``[[size, multiplicity], ...]``."""
    out: list[list[int]] = []
    for s in sizes:
        if out and out[-1][0] == s:
            out[-1][1] += 1
        else:
            out.append([int(s), 1])
    return out


def power_law_tail_exponent(values, xmin: Optional[float] = None) -> Optional[float]:
    """Continuous maximum-likelihood tail exponent (Hill estimator) above ``xmin``."""
    x = np.asarray(values, dtype=np.float64)
    x = x[x > 0]
    if len(x) < 10:
        return None
    if xmin is None:
        xmin = float(np.quantile(x, 0.9))
    tail = x[x >= xmin]
    logs = np.log(tail / xmin)
    if len(tail) < 5 or logs.sum() <= 0:
        return None
    return 1.0 + len(tail) / float(logs.sum())


# --- I/O ----------------------------------------------------------------------


def fmt_float(x: float) -> str:
    """Round-trip float formatting; empty string for missing values."""
    return "" if x is None or math.isnan(x) else repr(float(x))


def write_edges(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("u\tv\tweight\n")
        for u, v, w in g.edges():
            fh.write(f"{u}\t{v}\t{w}\n")


def write_nodes(g: WeightedGraph, path) -> None:
    deg, st = g.degree.tolist(), g.strength.tolist()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("word\tN\ttweet_count\tdegree\tstrength\th\n")
        for i, w in enumerate(g.nodes):
            fh.write(
                f"{w}\t{int(g.word_count[i])}\t{int(g.tweet_count[i])}\t{deg[i]}\t{st[i]}\t{fmt_float(g.score[i])}\n"
            )


def write_graphml(g: WeightedGraph, path) -> None:
    nx.write_graphml(g.to_networkx(), str(path))


def write_graph(g: WeightedGraph, directory, graphml: bool = True) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_edges(g, directory / "edges.tsv")
    write_nodes(g, directory / "nodes.tsv")
    if graphml:
        write_graphml(g, directory / "graph.graphml")


def _read_tsv(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if line:
                yield lineno, dict(zip(header, line.split("\t")))


def read_graph(directory) -> WeightedGraph:
    """Inverse of :func:`write_graph` (reads ``nodes.tsv`` and ``edges.tsv``)."""
    directory = Path(directory)
    names, wc, tc, sc = [], [], [], []
    try:
        for lineno, row in _read_tsv(directory / "nodes.tsv"):
            names.append(row["word"])
            wc.append(int(row["N"]))
            tc.append(int(row["tweet_count"]))
            sc.append(float(row["h"]) if row.get("h") else math.nan)
        edges = [(r["u"], r["v"], int(r["weight"])) for _, r in _read_tsv(directory / "edges.tsv")]
    except (KeyError, ValueError) as exc:
        raise DataError(f"{directory}: malformed graph table ({exc})") from exc
    return WeightedGraph.from_edges(names, edges, wc, tc, sc)
