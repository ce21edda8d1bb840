"""
Two-pass backbone extraction.

Pass one removes frequent-word hubs (general-purpose frequent words that are
also among the highest-degree nodes). Pass two prunes edges whose weight is
compatible with a null model: the disparity filter (per-node uniform
order-statistics null) or the noise-corrected filter (binomial pair null).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .graph import WeightedGraph, component_labels, fmt_float, weighted_mean_score
from .histograms import BinSpec, score_distribution, score_pair_grid, write_distributions

DEFAULT_ALPHA = 0.05
DEFAULT_DELTA = 1.64
DEFAULT_SWEEP = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05)
TOP_DEGREE = 200


@dataclass
class BackboneResult:
    graph: WeightedGraph
    method: str
    alpha: Optional[float] = None
    delta: Optional[float] = None
    removed_nodes: int = 0
    removed_edges: int = 0
    # Per input edge, aligned with the input graph's edge arrays.
    pvalues: Optional[np.ndarray] = None  # shape (E, 2): endpoint src, endpoint dst
    deviations: Optional[np.ndarray] = None  # (w - E) / sqrt(V)
    kept: Optional[np.ndarray] = None


# --- pass one: hubs -----------------------------------------------------------------


def _clean_word(word: str) -> Optional[str]:
    word = word.strip()
    if not word or not word.isalpha():
        return None
    return word.casefold()


def top_degree_words(g: WeightedGraph, k: int = TOP_DEGREE) -> list[str]:
    """The ``k`` highest-degree words; ties broken alphabetically."""
    order = sorted(range(g.n_nodes), key=lambda i: (-int(g.degree[i]), g.nodes[i]))
    return [g.nodes[i] for i in order[:k]]


def derive_stopwords(
    daily_lists: Sequence[Iterable[str]], g: WeightedGraph, top_k: int = TOP_DEGREE
) -> set[str]:
    """Words frequent on every day's list that are also hubs of ``g``.

    The daily lists are intersected as given (case-sensitive); entries with
    punctuation, digits or symbols are then dropped and the rest case-folded,
    which also merges case-insensitive duplicates.
    """
    if not daily_lists:
        raise ValueError("need at least one daily list")
    common = set(daily_lists[0])
    for lst in daily_lists[1:]:
        common &= set(lst)
    cleaned = {c for c in (_clean_word(w) for w in common) if c}
    return cleaned & set(top_degree_words(g, top_k))


def remove_hubs(g: WeightedGraph, stopwords: Iterable[str]) -> WeightedGraph:
    """Delete stop-word nodes; nodes left without edges by the deletion go too."""
    stop = set(stopwords)
    drop = np.array([w in stop for w in g.nodes], dtype=bool)
    if not drop.any():
        return g
    had_edges = g.degree > 0
    h = g.subgraph(node_mask=~drop)
    return h.drop_isolated(only=had_edges[~drop])


# --- pass two: edge filters -------------------------------------------------------


def disparity_pvalue(w, s, k):
    """P-value of normalized weight ``w/s`` at a node of degree ``k``.

    ``(1 - w/s)**(k - 1)``; nodes with ``k <= 1`` get 1.
    """
    w = np.asarray(w, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.power(1.0 - w / s, k - 1.0)
    return np.where(k > 1, p, 1.0)


def disparity_pvalues(g: WeightedGraph) -> np.ndarray:
    deg, st = g.degree, g.strength
    p_src = disparity_pvalue(g.weight, st[g.src], deg[g.src])
    p_dst = disparity_pvalue(g.weight, st[g.dst], deg[g.dst])
    return np.column_stack([p_src, p_dst]) if g.n_edges else np.zeros((0, 2))


def _apply_mask(g: WeightedGraph, keep: np.ndarray) -> WeightedGraph:
    return g.subgraph(edge_mask=keep).drop_isolated()


def disparity_filter(g: WeightedGraph, alpha: float = DEFAULT_ALPHA) -> BackboneResult:
    """Keep an edge if it is significant at level ``alpha`` from at least one endpoint.

    ``alpha == 1`` disables the filter and returns the graph unchanged.
    Otherwise nodes left isolated are dropped.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    pv = disparity_pvalues(g)
    if alpha >= 1:
        keep = np.ones(g.n_edges, dtype=bool)
        out = g
    else:
        keep = pv.min(axis=1) < alpha if g.n_edges else np.zeros(0, dtype=bool)
        out = _apply_mask(g, keep)
    return BackboneResult(
        out,
        "disparity",
        alpha=alpha,
        removed_nodes=g.n_nodes - out.n_nodes,
        removed_edges=g.n_edges - out.n_edges,
        pvalues=pv,
        kept=keep,
    )


def noise_corrected_scores(g: WeightedGraph) -> np.ndarray:
    """``(w - E) / sqrt(V)`` under a binomial null with T = total weight trials.

    E = s_i s_j / T and V = T p (1 - p) with p = s_i s_j / T**2. Edges with
    V == 0 get ``+inf``/``-inf``/0 according to the sign of ``w - E``.
    """
    T = float(g.total_weight)
    si = g.strength[g.src].astype(np.float64)
    sj = g.strength[g.dst].astype(np.float64)
    p = (si / T) * (sj / T)
    expected = si * sj / T
    var = T * p * (1.0 - p)
    diff = g.weight - expected
    degenerate = np.select([diff > 0, diff < 0], [np.inf, -np.inf], 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = diff / np.sqrt(np.maximum(var, 0.0))
    return np.where(var > 0, z, degenerate)


def noise_corrected_filter(g: WeightedGraph, delta: float = DEFAULT_DELTA) -> BackboneResult:
    """Keep edges whose weight exceeds the binomial expectation by more than ``delta`` standard deviations."""
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    if g.total_weight <= 0:
        raise ValueError("graph has no edge weight")
    T = float(g.total_weight)
    si = g.strength[g.src].astype(np.float64)
    sj = g.strength[g.dst].astype(np.float64)
    p = (si / T) * (sj / T)
    expected = si * sj / T
    sd = np.sqrt(np.maximum(T * p * (1.0 - p), 0.0))
    keep = (g.weight - expected) > delta * sd
    out = _apply_mask(g, keep)
    return BackboneResult(
        out,
        "noise_corrected",
        delta=delta,
        removed_nodes=g.n_nodes - out.n_nodes,
        removed_edges=g.n_edges - out.n_edges,
        deviations=noise_corrected_scores(g),
        kept=keep,
    )


def no_filter(g: WeightedGraph) -> BackboneResult:
    return BackboneResult(g, "none", kept=np.ones(g.n_edges, dtype=bool))


# --- threshold sweep --------------------------------------------------------------


@dataclass
class SweepRow:
    alpha: float
    nodes: int
    edges: int
    total_weight: int
    mean_score: Optional[float]
    n_components: int
    largest_component: int
    second_component: int
    n2_over_n: float
    graph: WeightedGraph = field(repr=False)

    def summary(self) -> dict:
        return {
            "alpha": self.alpha,
            "nodes": self.nodes,
            "edges": self.edges,
            "total_weight": self.total_weight,
            "mean_score": self.mean_score,
            "n_components": self.n_components,
            "largest_component": self.largest_component,
            "second_component": self.second_component,
            "n2_over_n": self.n2_over_n,
        }


def summarize_backbone(g: WeightedGraph, alpha: float) -> SweepRow:
    labels = component_labels(g)
    sizes = sorted(np.bincount(labels).tolist(), reverse=True) if len(labels) else []
    n = g.n_nodes
    second = sizes[1] if len(sizes) > 1 else 0
    return SweepRow(
        alpha=alpha,
        nodes=n,
        edges=g.n_edges,
        total_weight=g.total_weight,
        mean_score=weighted_mean_score(g.score, g.word_count),
        n_components=len(sizes),
        largest_component=sizes[0] if sizes else 0,
        second_component=second,
        n2_over_n=(second / n) if n else 0.0,
        graph=g,
    )


def threshold_sweep(g: WeightedGraph, alphas: Sequence[float]) -> list[SweepRow]:
    """Disparity-filter ``g`` (already hub-free) at each level and summarize."""
    if not alphas:
        raise ValueError("alphas must be nonempty")
    return [summarize_backbone(disparity_filter(g, a).graph, a) for a in alphas]


SWEEP_COLUMNS = (
    "alpha",
    "nodes",
    "edges",
    "total_weight",
    "mean_score",
    "n_components",
    "largest_component",
    "second_component",
    "n2_over_n",
)


def write_sweep(rows: Sequence[SweepRow], directory, bins: BinSpec = BinSpec()) -> None:
    """``sweep.csv`` plus per-level distributions and score-pair grids."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "sweep.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for r in rows:
            d = r.summary()
            fh.write(
                ",".join(fmt_float(d[c]) if isinstance(d[c], float) or d[c] is None else str(d[c]) for c in SWEEP_COLUMNS)
                + "\n"
            )
    edges = np.asarray(bins.score)
    with open(directory / "sweep_score_distributions.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("alpha,bin_lo,bin_hi,relative_frequency,relative_frequency_weighted\n")
        for r in rows:
            plain, weighted = score_distribution(r.graph.score, r.graph.word_count, edges)
            for b in range(len(edges) - 1):
                fh.write(
                    f"{fmt_float(r.alpha)},{fmt_float(edges[b])},{fmt_float(edges[b + 1])},"
                    f"{fmt_float(plain[b])},{fmt_float(weighted[b])}\n"
                )
    for r in rows:
        sub = directory / f"alpha_{r.alpha:g}"
        sub.mkdir(exist_ok=True)
        write_distributions(
            sub / "distributions.csv",
            {"degree": r.graph.degree, "strength": r.graph.strength, "weight": r.graph.weight},
        )
        score_pair_grid(r.graph, bins).to_csv(sub / "score_pair.csv")
