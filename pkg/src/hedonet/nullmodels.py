"""
Reference models that randomize either the co-occurrence structure or the
node scores while keeping the other fixed.

Every model takes a ``seed``: an int, a ``numpy.random.SeedSequence`` or a
ready ``numpy.random.Generator``. Replicate ``r`` of a model run with seed
``s`` uses ``SeedSequence(s, spawn_key=(r,))`` so replicates are independent
of execution order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from .graph import WeightedGraph

log = logging.getLogger(__name__)

BIT_GENERATOR = "numpy.random.PCG64"
KINDS = ("configuration", "erdos_renyi", "shuffled_scores", "uniform_scores")
CLI_KINDS = {"config": "configuration", "er": "erdos_renyi", "shuffle": "shuffled_scores", "uniform": "uniform_scores"}

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def replicate_seed(seed: int, replicate: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=(int(replicate),))


@dataclass(frozen=True)
class NullModelSpec:
    kind: str
    seed: int = 0
    replicates: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown null model {self.kind!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")


def configuration_model(g: WeightedGraph, seed: SeedLike) -> WeightedGraph:
    """Rewire the graph preserving node strengths as stub counts.

    Stubs are paired by a uniform random perfect matching. Self-loops are
    discarded and parallel unit edges merge into weighted edges. Node
    attributes (counts, scores) carry over unchanged.
    """
    rng = make_rng(seed)
    n = g.n_nodes
    if n == 0:
        return g
    stubs = g.strength.astype(np.int64).copy()
    if int(stubs.sum()) % 2 == 1:
        # Unreachable for graphs built from co-occurrence (total strength is 2 * total weight).
        candidates = np.flatnonzero(stubs > 0)
        victim = int(rng.choice(candidates))
        stubs[victim] -= 1
        log.warning("odd stub total; dropped one stub from node %r", g.nodes[victim])
    pool = np.repeat(np.arange(n, dtype=np.int64), stubs)
    rng.shuffle(pool)
    a, b = pool[0::2], pool[1::2]
    keep = a != b
    a, b = a[keep], b[keep]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    keys, counts = np.unique(lo * n + hi, return_counts=True)
    return g.with_edges(keys // n, keys % n, counts)


def pair_from_index(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices over the strict upper triangle (row-major) to ``(i, j)``."""
    k = np.asarray(k, dtype=np.int64)
    # row i starts at i*n - i*(i+1)/2 - ... ; solve the quadratic then fix rounding.
    nn = 2 * n - 1
    i = np.floor((nn - np.sqrt(np.maximum(nn * nn - 8.0 * k, 0.0))) / 2.0).astype(np.int64)
    start = i * (2 * n - i - 1) // 2
    # correct off-by-one from floating point
    over = k < start
    while over.any():
        i[over] -= 1
        start = i * (2 * n - i - 1) // 2
        over = k < start
    nxt = (i + 1) * (2 * n - i - 2) // 2
    under = k >= nxt
    while under.any():
        i[under] += 1
        start = i * (2 * n - i - 1) // 2
        nxt = (i + 1) * (2 * n - i - 2) // 2
        under = k >= nxt
    j = k - start + i + 1
    return i, j


def erdos_renyi_model(g: WeightedGraph, seed: SeedLike) -> WeightedGraph:
    """Random graph on the same nodes with edge probability E_obs / E_max.

    Weights of the new edges are resampled with replacement from the
    observed weight multiset.
    """
    rng = make_rng(seed)
    n = g.n_nodes
    if n < 2:
        raise ValueError("need at least two nodes")
    e_max = n * (n - 1) // 2
    p = g.n_edges / e_max
    if p <= 0:
        return g.with_edges([], [], [])
    # G(n, p) == G(n, M) with M ~ Binomial(E_max, p)
    m = int(rng.binomial(e_max, p))
    idx = np.sort(rng.choice(e_max, size=m, replace=False)) if m < e_max else np.arange(e_max)
    i, j = pair_from_index(idx, n)
    weights = rng.choice(g.weight, size=m, replace=True)
    return g.with_edges(i, j, weights)


def shuffle_scores(g: WeightedGraph, seed: SeedLike) -> WeightedGraph:
    """Permute the score vector (missing markers included) over the nodes."""
    rng = make_rng(seed)
    return g.with_scores(rng.permutation(g.score))


def uniform_scores(g: WeightedGraph, seed: SeedLike) -> WeightedGraph:
    """Independent continuous Uniform[1, 9] score for every node."""
    rng = make_rng(seed)
    return g.with_scores(rng.uniform(1.0, 9.0, size=g.n_nodes))


MODELS = {
    "configuration": configuration_model,
    "erdos_renyi": erdos_renyi_model,
    "shuffled_scores": shuffle_scores,
    "uniform_scores": uniform_scores,
}


def run_null_model(g: WeightedGraph, spec: NullModelSpec) -> list[WeightedGraph]:
    fn = MODELS[spec.kind]
    return [fn(g, replicate_seed(spec.seed, r)) for r in range(spec.replicates)]
