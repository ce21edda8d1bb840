"""
Louvain community detection and per-community sentiment attribution.
"""

from __future__ import annotations

import logging
import math
import string
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import WeightedGraph, deviation_weights, weighted_mean_score
from .lexicon import NEUTRAL, Lexicon
from .nullmodels import SeedLike, make_rng, replicate_seed, shuffle_scores

log = logging.getLogger(__name__)

MIN_COMMUNITY_SIZE = 15
TOP_WORDS = 20
DEFAULT_RESTARTS = 10


@dataclass
class Partition:
    assignment: dict[str, int]
    communities: dict[int, list[str]]
    modularity: float
    trace: list[float] = field(default_factory=list)  # Q after each level
    seed: Optional[int] = None
    resolution: float = 1.0

    def labels_for(self, nodes: Sequence[str]) -> np.ndarray:
        return np.array([self.assignment[w] for w in nodes], dtype=np.int64)


def modularity(g: WeightedGraph, labels, resolution: float = 1.0) -> float:
    """Weighted Newman modularity of a node labelling (array aligned with ``g.nodes``)."""
    labels = np.asarray(labels)
    m = float(g.total_weight)
    if m == 0:
        return 0.0
    same = labels[g.src] == labels[g.dst]
    internal = math.fsum(g.weight[same].astype(np.float64).tolist())
    _, inv = np.unique(labels, return_inverse=True)
    tot = np.bincount(inv, weights=g.strength.astype(np.float64))
    return internal / m - resolution * math.fsum(((tot / (2.0 * m)) ** 2).tolist())


class _Level:
    """Aggregated graph for one Louvain level."""

    def __init__(self, n: int, adj: list[dict[int, float]], loops: list[float]):
        self.n = n
        self.adj = adj
        self.loops = loops
        self.k = [loops[i] * 2 + sum(adj[i].values()) for i in range(n)]


def _local_moving(
    level: _Level, m: float, resolution: float, rng: np.random.Generator, start: Optional[list[int]] = None
) -> tuple[list[int], bool]:
    n = level.n
    comm = list(range(n)) if start is None else list(start)
    tot = [0.0] * n
    for i in range(n):
        tot[comm[i]] += level.k[i]
    order = rng.permutation(n).tolist()
    nbr_order = []
    for i in range(n):
        nb = list(level.adj[i].items())
        perm = rng.permutation(len(nb)).tolist() if nb else []
        nbr_order.append([nb[p] for p in perm])
    two_m = 2.0 * m
    improved = False
    moved = True
    passes = 0
    while moved:
        moved = False
        passes += 1
        if passes > 1000:  # guard against float ping-pong
            log.warning("local moving did not converge after 1000 passes")
            break
        for i in order:
            ki = level.k[i]
            ci = comm[i]
            links: dict[int, float] = {}
            seen: list[int] = []
            for j, w in nbr_order[i]:
                cj = comm[j]
                if cj not in links:
                    links[cj] = 0.0
                    seen.append(cj)
                links[cj] += w
            tot[ci] -= ki
            best_c = ci
            best_gain = links.get(ci, 0.0) - resolution * tot[ci] * ki / two_m
            eps = 1e-12 * max(1.0, ki)
            for c in seen:
                if c == ci:
                    continue
                gain = links[c] - resolution * tot[c] * ki / two_m
                if gain > best_gain + eps:
                    best_gain, best_c = gain, c
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                moved = True
                improved = True
    return comm, improved


def _level_modularity(level: _Level, comm: list[int], m: float, resolution: float) -> float:
    internal: dict[int, float] = {}
    tot: dict[int, float] = {}
    for i in range(level.n):
        c = comm[i]
        internal[c] = internal.get(c, 0.0) + level.loops[i]
        tot[c] = tot.get(c, 0.0) + level.k[i]
        for j, w in level.adj[i].items():
            if j > i and comm[j] == c:
                internal[c] += w
    return sum(internal.values()) / m - resolution * sum((t / (2.0 * m)) ** 2 for t in tot.values())


def _aggregate(level: _Level, comm: list[int]) -> tuple[_Level, list[int]]:
    renum: dict[int, int] = {}
    for c in comm:
        if c not in renum:
            renum[c] = len(renum)
    new = [renum[c] for c in comm]
    n2 = len(renum)
    adj: list[dict[int, float]] = [{} for _ in range(n2)]
    loops = [0.0] * n2
    for i in range(level.n):
        ci = new[i]
        loops[ci] += level.loops[i]
        for j, w in level.adj[i].items():
            if j <= i:
                continue
            cj = new[j]
            if ci == cj:
                loops[ci] += w
            else:
                adj[ci][cj] = adj[ci].get(cj, 0.0) + w
                adj[cj][ci] = adj[cj].get(ci, 0.0) + w
    return _Level(n2, adj, loops), new


def _compact(membership: list[int]) -> list[int]:
    renum: dict[int, int] = {}
    return [renum.setdefault(c, len(renum)) for c in membership]


def _canonical(g: WeightedGraph, membership: list[int]) -> tuple[dict[str, int], dict[int, list[str]]]:
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(membership):
        groups.setdefault(c, []).append(i)
    ordered = sorted(groups.values(), key=lambda idx: (-len(idx), idx[0]))
    assignment, communities = {}, {}
    for cid, idx in enumerate(ordered):
        communities[cid] = [g.nodes[i] for i in idx]
        for i in idx:
            assignment[g.nodes[i]] = cid
    return assignment, communities


def _louvain_once(g: WeightedGraph, rng: np.random.Generator, resolution: float, refine: bool) -> tuple[list[int], list[float]]:
    n = g.n_nodes
    m = float(g.total_weight)
    adj = [{k: float(v) for k, v in d.items()} for d in g.neighbors()]
    base = _Level(n, adj, [0.0] * n)
    membership = list(range(n))
    trace = [_level_modularity(base, membership, m, resolution)]
    level = base
    while True:
        # multilevel phase: local moving then aggregation until nothing moves
        while True:
            comm, improved = _local_moving(level, m, resolution, rng)
            if not improved:
                break
            q = _level_modularity(level, comm, m, resolution)
            level, new = _aggregate(level, comm)
            membership = [new[c] for c in membership]
            trace.append(q)
            if level.n == 1:
                break
        if not refine:
            break
        # refinement: let single words leave the communities they were merged into
        comm, improved = _local_moving(base, m, resolution, rng, start=_compact(membership))
        if not improved:
            break
        q = _level_modularity(base, comm, m, resolution)
        if q <= trace[-1]:
            break
        trace.append(q)
        level, membership = _aggregate(base, comm)
    return membership, trace


def louvain(
    g: WeightedGraph,
    seed: SeedLike = 0,
    resolution: float = 1.0,
    restarts: int = DEFAULT_RESTARTS,
    refine: bool = True,
) -> Partition:
    """Greedy modularity optimisation by local moving plus aggregation.

    Node visit order and neighbour order are shuffled once per level by the
    seeded generator; among equal gains the first candidate wins, and a
    node only moves for a strictly positive improvement. With ``refine``,
    the converged partition is revisited at word level and re-aggregated
    while that still raises Q. The best of ``restarts`` runs (drawn in
    sequence from one seeded stream, earliest wins ties) is returned.
    Community ids are renumbered by decreasing size (ties by first word).
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    rng = make_rng(seed)
    seed_id = seed if isinstance(seed, int) else None
    n = g.n_nodes
    if n == 0:
        raise ValueError("empty graph")
    if g.total_weight == 0:
        assignment, communities = _canonical(g, list(range(n)))
        return Partition(assignment, communities, 0.0, [0.0], seed_id, resolution)
    best = None
    for r in range(restarts):
        membership, trace = _louvain_once(g, rng, resolution, refine)
        if best is None or trace[-1] > best[1][-1]:
            best = (membership, trace)
        log.debug("louvain restart %d: Q=%r", r, trace[-1])
    membership, trace = best
    assignment, communities = _canonical(g, membership)
    return Partition(assignment, communities, trace[-1], trace, seed_id, resolution)


# --- reports ---------------------------------------------------------------------


def community_label(rank: int) -> str:
    """A, B, ..., Z, AA, AB, ..."""
    letters = string.ascii_uppercase
    label = ""
    rank += 1
    while rank:
        rank, r = divmod(rank - 1, 26)
        label = letters[r] + label
    return label


@dataclass
class WordRow:
    word: str
    community: int
    label: str
    N: int
    h: float
    h_delta_comm: float
    rel_freq: float


@dataclass
class CommunityStats:
    community: int
    label: str
    size: int
    total_count: int
    scored_count: int
    mean_score: Optional[float]
    top_words: list[WordRow]

    def summary(self) -> dict:
        return {
            "community": self.community,
            "label": self.label,
            "size": self.size,
            "total_count": self.total_count,
            "scored_count": self.scored_count,
            "mean_score": self.mean_score,
            "top_words": [w.word for w in self.top_words],
        }


@dataclass
class CommunityReport:
    communities: list[CommunityStats]
    words: list[WordRow]
    backbone_total_count: int
    min_size: int
    other: Optional[dict] = None

    def labelled(self) -> list[CommunityStats]:
        return [c for c in self.communities if c.label != "other"]


def community_report(
    p: Partition,
    g: WeightedGraph,
    lex: Optional[Lexicon] = None,
    top_n: int = TOP_WORDS,
    min_size: int = MIN_COMMUNITY_SIZE,
) -> CommunityReport:
    """Per-community word counts, mean scores and deviation contributions.

    Communities are ranked by node count; those with at least ``min_size``
    nodes get letters A, B, ... and the rest are pooled as ``other``.
    Deviation contributions use the community's own scored-word total as
    normaliser, so they sum to the community mean minus 5. Relative
    frequencies are against the whole backbone's word count.
    """
    if lex is not None:
        g = g.with_lexicon(lex)
    labels = p.labels_for(g.nodes)
    backbone_total = int(g.word_count.sum())
    ranked = sorted(p.communities, key=lambda c: (-len(p.communities[c]), c))
    stats, words = [], []
    other_idx: list[int] = []
    rank = 0
    for cid in ranked:
        idx = np.flatnonzero(labels == cid)
        if len(idx) >= min_size:
            label = community_label(rank)
            rank += 1
        else:
            label = "other"
            other_idx.extend(idx.tolist())
        h = g.score[idx]
        N = g.word_count[idx]
        dev = deviation_weights(h, N)
        rows = [
            WordRow(
                g.nodes[i],
                int(cid),
                label,
                int(g.word_count[i]),
                float(g.score[i]),
                float(d),
                (int(g.word_count[i]) / backbone_total) if backbone_total else 0.0,
            )
            for i, d in zip(idx.tolist(), dev.tolist())
        ]
        rows.sort(key=lambda r: (-r.N, r.word))
        words.extend(rows)
        stats.append(
            CommunityStats(
                int(cid),
                label,
                len(idx),
                int(N.sum()),
                int(N[~np.isnan(h)].sum()),
                weighted_mean_score(h, N),
                rows[:top_n],
            )
        )
    other = None
    if other_idx:
        oi = np.array(sorted(other_idx))
        other = {
            "label": "other",
            "communities": sum(1 for s in stats if s.label == "other"),
            "size": len(oi),
            "total_count": int(g.word_count[oi].sum()),
            "mean_score": weighted_mean_score(g.score[oi], g.word_count[oi]),
        }
    return CommunityReport(stats, words, backbone_total, min_size, other)


def baseline_scores(g_raw: WeightedGraph, g_backbone: WeightedGraph, lex: Optional[Lexicon] = None) -> dict:
    """Count-weighted mean scores of the backbone, the raw network, and the raw network without 4 < h < 6."""
    if lex is not None:
        g_raw, g_backbone = g_raw.with_lexicon(lex), g_backbone.with_lexicon(lex)
    h = g_raw.score
    outside = np.where((h > 4.0) & (h < 6.0), np.nan, h)
    return {
        "backbone": weighted_mean_score(g_backbone.score, g_backbone.word_count),
        "raw": weighted_mean_score(g_raw.score, g_raw.word_count),
        "raw_excluding_4_6": weighted_mean_score(outside, g_raw.word_count),
    }


@dataclass
class ControlRow:
    community: int
    label: str
    observed: Optional[float]
    shuffled_mean: Optional[float]
    shuffled_sd: Optional[float]
    lo: Optional[float]  # 2.5th percentile
    hi: Optional[float]  # 97.5th percentile

    @property
    def outside_envelope(self) -> bool:
        if self.observed is None or self.lo is None:
            return False
        return self.observed < self.lo or self.observed > self.hi

    def summary(self) -> dict:
        return {
            "community": self.community,
            "label": self.label,
            "observed": self.observed,
            "shuffled_mean": self.shuffled_mean,
            "shuffled_sd": self.shuffled_sd,
            "envelope_lo": self.lo,
            "envelope_hi": self.hi,
            "outside_envelope": self.outside_envelope,
        }


def shuffled_community_control(
    g: WeightedGraph,
    p: Partition,
    seed: int,
    replicates: int = 100,
    labels: Optional[dict[int, str]] = None,
) -> list[ControlRow]:
    """Per-community mean scores when scores are shuffled among the partitioned words.

    ``g`` supplies word counts and scores (normally the unfiltered network);
    only its nodes covered by the partition (the backbone vocabulary) take
    part in the shuffle. The partition is held fixed.
    """
    member = np.array([w in p.assignment for w in g.nodes], dtype=bool)
    sub = g.subgraph(node_mask=member)
    comm = np.array([p.assignment[w] for w in sub.nodes], dtype=np.int64)
    N = sub.word_count
    cids = sorted(p.communities)
    observed = {c: weighted_mean_score(sub.score[comm == c], N[comm == c]) for c in cids}
    samples: dict[int, list[float]] = {c: [] for c in cids}
    for r in range(replicates):
        shuffled = shuffle_scores(sub, replicate_seed(seed, r)).score
        for c in cids:
            v = weighted_mean_score(shuffled[comm == c], N[comm == c])
            if v is not None:
                samples[c].append(v)
    rows = []
    for c in cids:
        s = np.array(samples[c])
        label = (labels or {}).get(c, str(c))
        if len(s):
            rows.append(
                ControlRow(
                    c,
                    label,
                    observed[c],
                    math.fsum(s.tolist()) / len(s),
                    float(np.std(s)),
                    float(np.quantile(s, 0.025)),
                    float(np.quantile(s, 0.975)),
                )
            )
        else:
            rows.append(ControlRow(c, label, observed[c], None, None, None, None))
    return rows


def opposing_sentiment(control: Sequence[ControlRow], eligible: Optional[set[int]] = None) -> bool:
    """True if some community sits significantly above 5 and another significantly below."""
    rows = [r for r in control if eligible is None or r.community in eligible]
    pos = any(r.observed is not None and r.observed > NEUTRAL and r.outside_envelope and r.observed > r.hi for r in rows)
    neg = any(r.observed is not None and r.observed < NEUTRAL and r.outside_envelope and r.observed < r.lo for r in rows)
    return pos and neg
