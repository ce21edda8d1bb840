"""
2D histogram grids backing the score-profile figures, plus 1D distributions.

Values outside the bin range are clipped into the first/last bin so that
grid totals always equal the total input weight.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .graph import WeightedGraph, deviation_weights
from .lexicon import Lexicon


def _check_edges(edges, name):
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or len(edges) < 2 or not np.all(np.diff(edges) > 0):
        raise ValueError(f"{name} bin edges must be strictly increasing with at least 2 entries")
    return edges


@dataclass(frozen=True)
class BinSpec:
    """Bin edges shared by every grid of a run (needed to compare runs)."""

    score: tuple[float, ...] = tuple(np.round(np.linspace(1.0, 9.0, 33), 10).tolist())
    # log10 of counts/strengths/degrees
    log_count: tuple[float, ...] = tuple(np.round(np.arange(0.0, 7.0001, 0.2), 10).tolist())

    def __post_init__(self):
        _check_edges(self.score, "score")
        _check_edges(self.log_count, "log_count")

    @property
    def count_edges(self) -> np.ndarray:
        return 10.0 ** np.asarray(self.log_count)

    def to_dict(self) -> dict:
        return {"score": list(self.score), "log_count": list(self.log_count)}

    @classmethod
    def from_dict(cls, d: dict) -> "BinSpec":
        return cls(tuple(float(x) for x in d["score"]), tuple(float(x) for x in d["log_count"]))


@dataclass
class HistogramGrid:
    x_label: str
    y_label: str
    x_edges: np.ndarray
    y_edges: np.ndarray
    values: np.ndarray  # shape (len(x_edges)-1, len(y_edges)-1)
    skipped: int = 0

    @property
    def total(self) -> float:
        return math.fsum(self.values.ravel().tolist())

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x_edges", self.x_label] + [repr(float(e)) for e in self.x_edges])
            w.writerow(["y_edges", self.y_label] + [repr(float(e)) for e in self.y_edges])
            w.writerow(["skipped", self.skipped])
            for i, row in enumerate(self.values):
                w.writerow([f"x{i}", ""] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "HistogramGrid":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        x_edges = np.array([float(v) for v in rows[0][2:]])
        y_edges = np.array([float(v) for v in rows[1][2:]])
        skipped = int(rows[2][1])
        values = np.array([[float(v) for v in r[2:]] for r in rows[3:]]).reshape(len(x_edges) - 1, len(y_edges) - 1)
        return cls(rows[0][1], rows[1][1], x_edges, y_edges, values, skipped)


def _bin_index(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def histogram2d(x, y, weights, x_edges, y_edges, x_label="x", y_label="y", skipped=0) -> HistogramGrid:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    x_edges = np.asarray(x_edges, dtype=np.float64)
    y_edges = np.asarray(y_edges, dtype=np.float64)
    nx_, ny = len(x_edges) - 1, len(y_edges) - 1
    flat = _bin_index(x, x_edges) * ny + _bin_index(y, y_edges)
    values = np.bincount(flat, weights=weights, minlength=nx_ * ny).reshape(nx_, ny)
    return HistogramGrid(x_label, y_label, x_edges, y_edges, values, skipped)


def score_pair_grid(g: WeightedGraph, bins: BinSpec = BinSpec()) -> HistogramGrid:
    """Edge weight accumulated at (h_u, h_v) and (h_v, h_u)."""
    hu, hv = g.score[g.src], g.score[g.dst]
    ok = ~(np.isnan(hu) | np.isnan(hv))
    w = g.weight[ok]
    edges = np.asarray(bins.score)
    return histogram2d(
        np.concatenate([hu[ok], hv[ok]]),
        np.concatenate([hv[ok], hu[ok]]),
        np.concatenate([w, w]),
        edges,
        edges,
        "h_u",
        "h_v",
        skipped=int((~ok).sum()),
    )


def score_profiles(g: WeightedGraph, lex: Optional[Lexicon] = None, bins: BinSpec = BinSpec()) -> dict[str, HistogramGrid]:
    """All node- and edge-centric score grids for one graph.

    Keys: ``count_score`` (unit weights), ``deviation_score`` (weights are
    deviation-from-neutral contributions), ``strength_score``,
    ``degree_score`` and ``score_pair``. Unscored nodes are skipped and counted.
    """
    if lex is not None:
        g = g.with_lexicon(lex)
    ok = g.scored
    skipped = int((~ok).sum())
    h = g.score[ok]
    s_edges = np.asarray(bins.score)
    c_edges = bins.count_edges
    N = g.word_count[ok]
    dev = deviation_weights(g.score, g.word_count)[ok]
    return {
        "count_score": histogram2d(h, N, np.ones(len(h)), s_edges, c_edges, "h", "N", skipped),
        "deviation_score": histogram2d(h, N, dev, s_edges, c_edges, "h", "N", skipped),
        "strength_score": histogram2d(h, g.strength[ok], np.ones(len(h)), s_edges, c_edges, "h", "strength", skipped),
        "degree_score": histogram2d(h, g.degree[ok], np.ones(len(h)), s_edges, c_edges, "h", "degree", skipped),
        "score_pair": score_pair_grid(g, bins),
    }


def grid_cosine(a: HistogramGrid, b: HistogramGrid) -> float:
    va, vb = a.values.ravel(), b.values.ravel()
    na, nb = math.sqrt(math.fsum((va * va).tolist())), math.sqrt(math.fsum((vb * vb).tolist()))
    if na == 0 or nb == 0:
        return 0.0
    return math.fsum((va * vb).tolist()) / (na * nb)


def mean_grid(grids: list[HistogramGrid]) -> HistogramGrid:
    first = grids[0]
    values = np.mean([g.values for g in grids], axis=0)
    return HistogramGrid(first.x_label, first.y_label, first.x_edges, first.y_edges, values, first.skipped)


# --- 1D distributions -----------------------------------------------------------


def value_counts(values) -> list[tuple[int, int]]:
    """Exact ``(value, frequency)`` pairs for an integer-valued sample."""
    vals, counts = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
    return list(zip(vals.tolist(), counts.tolist()))


def write_distributions(path, columns: dict[str, np.ndarray]) -> None:
    """Long-format table ``quantity, value, frequency`` of integer distributions."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["quantity", "value", "frequency"])
        for name, values in columns.items():
            for v, c in value_counts(values):
                w.writerow([name, v, c])


def score_distribution(score, counts, edges) -> tuple[np.ndarray, np.ndarray]:
    """Relative frequencies of scores, unweighted and weighted by word count."""
    score = np.asarray(score, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    ok = ~np.isnan(score)
    edges = np.asarray(edges)
    idx = _bin_index(score[ok], edges)
    nb = len(edges) - 1
    plain = np.bincount(idx, minlength=nb).astype(np.float64)
    weighted = np.bincount(idx, weights=counts[ok], minlength=nb)
    if plain.sum() > 0:
        plain /= plain.sum()
    if weighted.sum() > 0:
        weighted /= weighted.sum()
    return plain, weighted


def write_grids(grids: dict[str, HistogramGrid], directory, prefix: str = "") -> list[str]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for key, grid in grids.items():
        name = f"{prefix}{key}.csv"
        grid.to_csv(directory / name)
        names.append(name)
    return names
