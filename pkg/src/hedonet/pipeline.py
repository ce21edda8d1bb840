"""
End-to-end pipeline: ingest -> graph -> null models -> backbone -> communities.

Every stage reads its inputs from files written by earlier stages, so any
stage can be re-run from a checkpointed output tree. Stages write into a
temporary directory which is moved into place only on success.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import logging
import math
import os
import shutil
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .backbone import (
    DEFAULT_ALPHA,
    DEFAULT_DELTA,
    DEFAULT_SWEEP,
    TOP_DEGREE,
    derive_stopwords,
    disparity_filter,
    no_filter,
    noise_corrected_filter,
    remove_hubs,
    threshold_sweep,
    write_sweep,
)
from .community import (
    DEFAULT_RESTARTS,
    MIN_COMMUNITY_SIZE,
    TOP_WORDS,
    Partition,
    baseline_scores,
    community_report,
    louvain,
    opposing_sentiment,
    shuffled_community_control,
)
from .corpus import (
    ParserConfig,
    parse_corpus,
    read_documents,
    read_parsed,
    read_word_list,
    restrict_vocabulary,
    write_parsed,
    write_word_counts,
)
from .errors import ConfigError, DataError
from .graph import (
    WeightedGraph,
    assortativity_table,
    build_graph,
    deviation_weights,
    fmt_float,
    graph_summary,
    power_law_tail_exponent,
    read_graph,
    write_graph,
)
from .histograms import BinSpec, histogram2d, mean_grid, score_profiles, write_distributions, write_grids
from .lexicon import load_lexicon
from .nullmodels import BIT_GENERATOR, KINDS, NullModelSpec, run_null_model

log = logging.getLogger(__name__)

OUTPUT_ENV = "HEDONET_OUTPUT"
STAGE_KEYS = {"nullmodel": 0, "louvain": 1, "control": 2}
SEED_SCHEME = (
    "stage seed = first 64 bits of numpy SeedSequence(entropy=root_seed, spawn_key=(stage_key, *sub_keys)); "
    "stage_key: nullmodel=0 (sub_key = model index in "
    + ",".join(KINDS)
    + "), louvain=1, control=2; replicate r of a stage uses SeedSequence(stage_seed, spawn_key=(r,))"
)


def derive_seed(root: int, stage: str, *sub: int) -> int:
    ss = np.random.SeedSequence(int(root), spawn_key=(STAGE_KEYS[stage], *sub))
    lo, hi = ss.generate_state(2, dtype=np.uint32).tolist()
    return (hi << 32) | lo


@dataclass
class PipelineConfig:
    corpus: Optional[Path] = None
    lexicon: Optional[Path] = None
    aliases: Optional[Path] = None
    output_dir: Optional[Path] = None
    input_format: str = "jsonl"
    anchors: tuple[str, ...] = ()
    remove_words: tuple[str, ...] = ()
    require_scores: bool = False
    stopwords: Optional[Path] = None
    daily_lists: Optional[Path] = None
    top_degree: int = TOP_DEGREE
    backbone: str = "disparity"
    alpha: float = DEFAULT_ALPHA
    delta: float = DEFAULT_DELTA
    sweep: tuple[float, ...] = DEFAULT_SWEEP
    null_models: tuple[str, ...] = KINDS
    replicates: int = 1
    seed: int = 0
    resolution: float = 1.0
    restarts: int = DEFAULT_RESTARTS
    min_community_size: int = MIN_COMMUNITY_SIZE
    top_words: int = TOP_WORDS
    control_replicates: int = 100
    bins: BinSpec = field(default_factory=BinSpec)
    graphml: bool = True

    def validate(self, stages: Sequence[str] = ("ingest", "graph", "nullmodel", "backbone", "community")) -> None:
        if self.output_dir is None:
            raise ConfigError("no output directory given")
        required = []
        if "ingest" in stages:
            required.append(("corpus", self.corpus))
        if "graph" in stages:
            required.append(("lexicon", self.lexicon))
        for name, p in required:
            if p is None:
                raise ConfigError(f"missing required input: {name}")
        for name in ("corpus", "lexicon", "aliases", "stopwords", "daily_lists"):
            p = getattr(self, name)
            if p is not None and not Path(p).exists():
                raise ConfigError(f"{name} path does not exist: {p}")
        if self.input_format not in ("jsonl", "txt"):
            raise ConfigError(f"unknown input format {self.input_format!r}")
        if self.backbone not in ("disparity", "nc", "none"):
            raise ConfigError(f"unknown backbone method {self.backbone!r}")
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.delta < 0:
            raise ConfigError(f"delta must be nonnegative, got {self.delta}")
        if any(not 0 < a <= 1 for a in self.sweep):
            raise ConfigError("sweep levels must lie in (0, 1]")
        for k in self.null_models:
            if k not in KINDS:
                raise ConfigError(f"unknown null model {k!r}")
        if self.replicates < 1 or self.control_replicates < 1:
            raise ConfigError("replicate counts must be positive")
        if self.resolution <= 0:
            raise ConfigError("resolution must be positive")
        if self.restarts < 1:
            raise ConfigError("restarts must be positive")
        if self.stopwords is not None and self.daily_lists is not None:
            raise ConfigError("give either stopwords or daily_lists, not both")

    @classmethod
    def from_mapping(cls, d: dict[str, Any]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kw: dict[str, Any] = {}
        for k, v in d.items():
            if v is None:
                continue
            if k in ("corpus", "lexicon", "aliases", "output_dir", "stopwords", "daily_lists"):
                kw[k] = Path(v)
            elif k in ("anchors", "remove_words", "null_models"):
                kw[k] = tuple(v)
            elif k == "sweep":
                kw[k] = tuple(float(x) for x in v)
            elif k == "bins":
                try:
                    kw[k] = v if isinstance(v, BinSpec) else BinSpec.from_dict(v)
                except (KeyError, ValueError, TypeError) as exc:
                    raise ConfigError(f"bad bin spec: {exc}") from exc
            else:
                kw[k] = v
        return cls(**kw)


# --- small I/O helpers ----------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: NaN/inf become None, numpy scalars become Python numbers."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_record(p: Optional[Path]) -> Optional[dict]:
    if p is None:
        return None
    p = Path(p)
    if p.is_dir():
        files = sorted(q for q in p.iterdir() if q.is_file())
        return {"name": p.name, "files": [{"name": q.name, "sha256": file_digest(q)} for q in files]}
    return {"name": p.name, "sha256": file_digest(p)}


class _StageDir:
    """Write into ``<target>.tmp`` and swap into place on success."""

    def __init__(self, target: Path):
        self.target = Path(target)
        self.tmp = None

    def __enter__(self) -> Path:
        self.target.parent.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=f".{self.target.name}.", dir=self.target.parent))
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            shutil.rmtree(self.tmp, ignore_errors=True)
            return False
        if self.target.exists():
            shutil.rmtree(self.target)
        os.replace(self.tmp, self.target)
        return False


def _prepare_root(out: Path) -> None:
    """Refuse to clobber a non-empty directory we did not create."""
    if out.exists():
        if not out.is_dir():
            raise ConfigError(f"output path exists and is not a directory: {out}")
        if any(out.iterdir()) and not (out / "manifest.json").exists() and not any(
            (out / s).exists() for s in ("corpus", "graph")
        ):
            raise ConfigError(f"output directory is not empty and holds no previous run: {out}")


# --- stages -------------------------------------------------------------------------


def stage_ingest(cfg: PipelineConfig) -> dict:
    out = Path(cfg.output_dir)
    parser_cfg = ParserConfig.build(cfg.anchors, cfg.remove_words)
    docs = read_documents(cfg.corpus, cfg.input_format)
    corpus = parse_corpus(docs, parser_cfg)
    with _StageDir(out / "corpus") as d:
        write_parsed(corpus, d / "parsed.jsonl")
        write_word_counts(corpus, d / "word_counts.tsv")
        summary = {
            "documents": len(corpus),
            "vocabulary": len(corpus.tweet_counts),
            "tokens": sum(corpus.word_counts.values()),
            "empty_documents": sum(1 for doc in corpus.documents if not doc.tokens),
            "anchors": sorted(parser_cfg.anchors_to_remove),
            "remove_words": sorted(parser_cfg.extra_removals),
            "input": _input_record(cfg.corpus),
        }
        write_json(d / "summary.json", summary)
    return summary


def stage_graph(cfg: PipelineConfig) -> dict:
    out = Path(cfg.output_dir)
    parsed = out / "corpus" / "parsed.jsonl"
    if not parsed.exists():
        raise ConfigError(f"no parsed corpus at {parsed}; run ingest first")
    corpus = read_parsed(parsed)
    lex = load_lexicon(cfg.lexicon, cfg.aliases)
    if cfg.require_scores:
        corpus = restrict_vocabulary(corpus, lambda w: lex.score_of(w) is not None)
    g = build_graph(corpus, lex)
    with _StageDir(out / "graph") as d:
        write_graph(g, d, graphml=cfg.graphml)
        doc_sizes = np.array([len(doc.unique_tokens) for doc in corpus.documents], dtype=np.int64)
        write_distributions(
            d / "distributions.csv",
            {
                "degree": g.degree,
                "strength": g.strength,
                "weight": g.weight,
                "word_count": g.word_count,
                "tweet_count": g.tweet_count,
                "document_size": doc_sizes,
            },
        )
        write_grids(score_profiles(g, bins=cfg.bins), d / "profiles")
        summary = graph_summary(g, len(corpus))
        summary["assortativity"] = assortativity_table(g)
        summary["tail_exponents"] = {
            "degree": power_law_tail_exponent(g.degree),
            "strength": power_law_tail_exponent(g.strength),
            "weight": power_law_tail_exponent(g.weight),
        }
        summary["lexicon"] = {
            "entries": len(lex),
            "aliases": len(lex.aliases),
            "duplicates": lex.duplicates,
            "input": _input_record(cfg.lexicon),
            "alias_input": _input_record(cfg.aliases),
        }
        summary["require_scores"] = cfg.require_scores
        summary["bins"] = cfg.bins.to_dict()
        write_json(d / "summary.json", summary)
    return summary


def _load_graph(out: Path) -> WeightedGraph:
    if not (out / "graph" / "nodes.tsv").exists():
        raise ConfigError(f"no graph at {out / 'graph'}; run the graph stage first")
    return read_graph(out / "graph")


def stage_nullmodels(cfg: PipelineConfig) -> dict:
    out = Path(cfg.output_dir)
    g = _load_graph(out)
    summary: dict[str, Any] = {"bit_generator": BIT_GENERATOR, "seed_scheme": SEED_SCHEME, "models": {}}
    with _StageDir(out / "nullmodels") as d:
        for kind in cfg.null_models:
            if kind == "erdos_renyi" and g.n_nodes < 2:
                log.warning("skipping Erdos-Renyi model on a graph with fewer than two nodes")
                continue
            seed = derive_seed(cfg.seed, "nullmodel", KINDS.index(kind))
            spec = NullModelSpec(kind, seed, cfg.replicates)
            reps = run_null_model(g, spec)
            kd = d / kind
            grids = []
            rep_summaries = []
            for r, h in enumerate(reps):
                rd = kd / f"rep_{r:03d}"
                write_graph(h, rd, graphml=False)
                pr = score_profiles(h, bins=cfg.bins)
                write_grids(pr, rd / "profiles")
                grids.append(pr)
                s = graph_summary(h)
                s["assortativity"] = assortativity_table(h)
                rep_summaries.append(s)
            ensemble = {key: mean_grid([gr[key] for gr in grids]) for key in grids[0]}
            write_grids(ensemble, kd / "profiles")
            model_summary = {
                "kind": kind,
                "seed": seed,
                "replicates": cfg.replicates,
                "bit_generator": BIT_GENERATOR,
                "replicate_summaries": rep_summaries,
                "mean_edges": float(np.mean([s["edges"] for s in rep_summaries])),
                "mean_total_weight": float(np.mean([s["total_edge_weight"] for s in rep_summaries])),
            }
            write_json(kd / "ensemble_summary.json", model_summary)
            summary["models"][kind] = {k: v for k, v in model_summary.items() if k != "replicate_summaries"}
        write_json(d / "summary.json", summary)
    return summary


def _stopwords(cfg: PipelineConfig, g: WeightedGraph) -> tuple[list[str], str]:
    if cfg.stopwords is not None:
        return sorted(set(w.lower() for w in read_word_list(cfg.stopwords))), "file"
    if cfg.daily_lists is not None:
        files = sorted(p for p in Path(cfg.daily_lists).iterdir() if p.is_file())
        if not files:
            raise ConfigError(f"no daily lists in {cfg.daily_lists}")
        lists = [read_word_list(p) for p in files]
        return sorted(derive_stopwords(lists, g, cfg.top_degree)), "daily_lists"
    return [], "none"


def write_edge_tests(g: WeightedGraph, result, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if result.pvalues is not None:
            fh.write("u\tv\tweight\tp_u\tp_v\tkept\n")
            for k, (u, v, w) in enumerate(g.edges()):
                fh.write(
                    f"{u}\t{v}\t{w}\t{fmt_float(result.pvalues[k, 0])}\t{fmt_float(result.pvalues[k, 1])}\t{int(result.kept[k])}\n"
                )
        elif result.deviations is not None:
            fh.write("u\tv\tweight\tdeviation\tkept\n")
            for k, (u, v, w) in enumerate(g.edges()):
                fh.write(f"{u}\t{v}\t{w}\t{fmt_float(result.deviations[k])}\t{int(result.kept[k])}\n")
        else:
            fh.write("u\tv\tweight\tkept\n")
            for u, v, w in g.edges():
                fh.write(f"{u}\t{v}\t{w}\t1\n")


def stage_backbone(cfg: PipelineConfig) -> dict:
    out = Path(cfg.output_dir)
    g = _load_graph(out)
    stop, source = _stopwords(cfg, g)
    hubless = remove_hubs(g, stop)
    if cfg.backbone == "disparity":
        result = disparity_filter(hubless, cfg.alpha)
    elif cfg.backbone == "nc":
        if hubless.total_weight <= 0:
            raise DataError("graph has no edges left after hub removal")
        result = noise_corrected_filter(hubless, cfg.delta)
    else:
        result = no_filter(hubless)
    bb = result.graph
    with _StageDir(out / "backbone") as d:
        with open(d / "stopwords.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(w + "\n" for w in stop)
        write_graph(hubless, d / "hubless", graphml=False)
        write_graph(bb, d, graphml=cfg.graphml)
        write_edge_tests(hubless, result, d / "edge_tests.tsv")
        profiles = score_profiles(bb, bins=cfg.bins)
        write_grids({k: profiles[k] for k in ("count_score", "deviation_score", "score_pair")}, d / "profiles")
        summary = {
            "method": result.method,
            "alpha": result.alpha,
            "delta": result.delta,
            "stopword_source": source,
            "stopwords": len(stop),
            "hub_removal": {"nodes": hubless.n_nodes, "edges": hubless.n_edges, "removed_nodes": g.n_nodes - hubless.n_nodes},
            "removed_nodes": result.removed_nodes,
            "removed_edges": result.removed_edges,
            "weight_one_edges": int((bb.weight == 1).sum()),
            "graph": graph_summary(bb),
            "assortativity": assortativity_table(bb),
        }
        write_json(d / "summary.json", summary)
    if cfg.sweep:
        rows = threshold_sweep(hubless, list(cfg.sweep))
        with _StageDir(out / "sweep") as d:
            write_sweep(rows, d, cfg.bins)
            write_json(d / "summary.json", {"levels": [r.summary() for r in rows], "raw": graph_summary(g)})
        summary["sweep"] = [r.summary() for r in rows]
    return summary


def stage_community(cfg: PipelineConfig) -> dict:
    out = Path(cfg.output_dir)
    g_raw = _load_graph(out)
    if not (out / "backbone" / "nodes.tsv").exists():
        raise ConfigError("no backbone found; run the backbone stage first")
    bb = read_graph(out / "backbone")
    louvain_seed = derive_seed(cfg.seed, "louvain")
    control_seed = derive_seed(cfg.seed, "control")
    with _StageDir(out / "community") as d:
        if bb.n_nodes == 0:
            summary = {"communities": [], "note": "empty backbone", "baselines": baseline_scores(g_raw, bb)}
            write_json(d / "community_summary.json", summary)
            return summary
        part = louvain(bb, louvain_seed, cfg.resolution, restarts=cfg.restarts)
        report = community_report(part, bb, top_n=cfg.top_words, min_size=cfg.min_community_size)
        labels = {c.community: c.label for c in report.communities}
        control = shuffled_community_control(g_raw, part, control_seed, cfg.control_replicates, labels)
        baselines = baseline_scores(g_raw, bb)
        _write_community_outputs(d, report, control, bb, cfg)
        eligible = {c.community for c in report.labelled()}
        summary = {
            "louvain_seed": louvain_seed,
            "control_seed": control_seed,
            "control_replicates": cfg.control_replicates,
            "resolution": cfg.resolution,
            "restarts": cfg.restarts,
            "modularity": part.modularity,
            "modularity_trace": part.trace,
            "n_communities": len(part.communities),
            "min_size": cfg.min_community_size,
            "communities": [c.summary() for c in report.communities if c.label != "other"],
            "other": report.other,
            "baselines": baselines,
            "backbone_total_count": report.backbone_total_count,
            "opposing_sentiment": opposing_sentiment(control, eligible),
            "control": [r.summary() for r in control if r.community in eligible],
        }
        write_json(d / "community_summary.json", summary)
    return summary


def _write_community_outputs(d: Path, report, control, bb: WeightedGraph, cfg: PipelineConfig) -> None:
    with open(d / "communities.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("word\tcommunity\tN\th\th_delta_comm\trel_freq\tlabel\n")
        for r in report.words:
            fh.write(
                f"{r.word}\t{r.community}\t{r.N}\t{fmt_float(r.h)}\t{fmt_float(r.h_delta_comm)}\t{fmt_float(r.rel_freq)}\t{r.label}\n"
            )
    s_edges = np.asarray(cfg.bins.score)
    c_edges = cfg.bins.count_edges
    for c in report.labelled():
        with open(d / f"wordbars_{c.label}.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("word,N,h,h_delta_comm,rel_freq\n")
            for r in c.top_words:
                fh.write(f"{r.word},{r.N},{fmt_float(r.h)},{fmt_float(r.h_delta_comm)},{fmt_float(r.rel_freq)}\n")
        rows = [r for r in report.words if r.community == c.community and not math.isnan(r.h)]
        h = np.array([r.h for r in rows])
        N = np.array([r.N for r in rows])
        dev = deviation_weights(h, N) if len(rows) else np.zeros(0)
        (d / "profiles").mkdir(exist_ok=True)
        histogram2d(h, N, dev, s_edges, c_edges, "h", "N").to_csv(d / "profiles" / f"{c.label}_deviation_score.csv")
    by_id = {r.community: r for r in control}
    with open(d / "community_scores.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("community,label,size,total_count,mean_score,shuffled_mean,shuffled_sd,envelope_lo,envelope_hi,outside_envelope\n")
        for c in report.communities:
            r = by_id.get(c.community)
            fh.write(
                ",".join(
                    [
                        str(c.community),
                        c.label,
                        str(c.size),
                        str(c.total_count),
                        fmt_float(c.mean_score),
                        fmt_float(r.shuffled_mean) if r else "",
                        fmt_float(r.shuffled_sd) if r else "",
                        fmt_float(r.lo) if r else "",
                        fmt_float(r.hi) if r else "",
                        str(int(r.outside_envelope)) if r else "",
                    ]
                )
                + "\n"
            )


# --- manifest ------------------------------------------------------------------------

NULL_FIGURES = {
    "count_score_histograms": ("count_score.csv", "deviation_score.csv"),
    "strength_degree_score_histograms": ("strength_score.csv", "degree_score.csv"),
    "score_pair_histogram": ("score_pair.csv",),
}


def build_manifest(out: Path) -> dict[str, list[str]]:
    """Map each figure class to the data files that back it (paths relative to ``out``)."""

    def rel(paths):
        return sorted(str(p.relative_to(out)).replace(os.sep, "/") for p in paths)

    m: dict[str, list[str]] = {
        "network_distributions": rel([out / "graph" / "distributions.csv"]),
        "count_score_histograms": rel([out / "graph/profiles/count_score.csv", out / "graph/profiles/deviation_score.csv"]),
        "strength_degree_score_histograms": rel(
            [out / "graph/profiles/strength_score.csv", out / "graph/profiles/degree_score.csv"]
        ),
        "score_pair_histogram": rel([out / "graph/profiles/score_pair.csv"]),
        "backbone_count_score_histograms": rel(
            [out / "backbone/profiles/count_score.csv", out / "backbone/profiles/deviation_score.csv"]
        ),
        "community_wordbars": rel((out / "community").glob("wordbars_*.csv")),
        "community_score_contributions": rel((out / "community" / "profiles").glob("*_deviation_score.csv")),
        "community_mean_scores": rel([out / "community/community_scores.csv", out / "community/community_summary.json"]),
    }
    for kind in KINDS:
        for fig, files in NULL_FIGURES.items():
            m[f"null_{kind}_{fig}"] = rel([out / "nullmodels" / kind / "profiles" / f for f in files])
    m["sweep_order_size_mean"] = rel([out / "sweep/sweep.csv"])
    m["sweep_components"] = rel([out / "sweep/sweep.csv"])
    m["sweep_score_distributions"] = rel([out / "sweep/sweep_score_distributions.csv"])
    m["sweep_degree_weight_distributions"] = rel((out / "sweep").glob("alpha_*/distributions.csv"))
    m["sweep_score_pair"] = rel((out / "sweep").glob("alpha_*/score_pair.csv"))
    return {k: [p for p in v if (out / p).exists()] for k, v in m.items()}


# --- full run ------------------------------------------------------------------------


def _timestamp() -> Optional[str]:
    # Only reproducible timestamps go into outputs.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if not epoch:
        return None
    return datetime.datetime.fromtimestamp(int(epoch), tz=datetime.timezone.utc).isoformat()


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run every stage into ``cfg.output_dir`` and return the run summary.

    The whole tree is built in a temporary sibling directory and moved into
    place at the end, so a failed run leaves no partial outputs.
    """
    cfg.validate()
    final = Path(cfg.output_dir)
    _prepare_root(final)
    final.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{final.name}.run.", dir=final.parent))
    stage = "setup"
    try:
        work = _with_output(cfg, tmp)
        stage = "ingest"
        ingest = stage_ingest(work)
        stage = "graph"
        graph = stage_graph(work)
        stage = "nullmodel"
        nulls = stage_nullmodels(work) if cfg.null_models else None
        stage = "backbone"
        bb = stage_backbone(work)
        stage = "community"
        comm = stage_community(work)
        stage = "summary"
        summary = {
            "tool": {"name": "hedonet", "version": __version__},
            "timestamp": _timestamp(),
            "seeds": {
                "root": cfg.seed,
                "scheme": SEED_SCHEME,
                "bit_generator": BIT_GENERATOR,
                "louvain": comm.get("louvain_seed"),
                "control": comm.get("control_seed"),
            },
            "corpus": {
                "documents": ingest["documents"],
                "nodes": graph["nodes"],
                "total_edge_weight": graph["total_edge_weight"],
                "edges": graph["edges"],
                "component_sizes": graph["component_sizes"],
                "score_coverage": graph["score_coverage"],
                "token_coverage": graph["token_coverage"],
                "mean_score": graph["mean_score"],
            },
            "assortativity": graph["assortativity"],
            "null_models": nulls["models"] if nulls else {},
            "backbone": {k: v for k, v in bb.items() if k != "sweep"},
            "community": {
                k: comm.get(k)
                for k in ("modularity", "n_communities", "communities", "baselines", "opposing_sentiment", "control", "other")
            },
            "bins": cfg.bins.to_dict(),
            "config": _config_record(cfg),
        }
        write_json(tmp / "run_summary.json", summary)
        write_json(tmp / "manifest.json", build_manifest(tmp))
    except BaseException as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        if isinstance(exc, (ConfigError, DataError)):
            raise type(exc)(f"stage {stage}: {exc}") from exc
        raise
    if final.exists():
        shutil.rmtree(final)
    os.replace(tmp, final)
    return summary


def _with_output(cfg: PipelineConfig, out: Path) -> PipelineConfig:
    d = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    d["output_dir"] = out
    return PipelineConfig(**d)


def _config_record(cfg: PipelineConfig) -> dict:
    return {
        "input_format": cfg.input_format,
        "anchors": sorted(cfg.anchors),
        "remove_words": sorted(cfg.remove_words),
        "require_scores": cfg.require_scores,
        "stopword_source": "file" if cfg.stopwords else ("daily_lists" if cfg.daily_lists else "none"),
        "top_degree": cfg.top_degree,
        "backbone": cfg.backbone,
        "alpha": cfg.alpha,
        "delta": cfg.delta,
        "sweep": list(cfg.sweep),
        "null_models": list(cfg.null_models),
        "replicates": cfg.replicates,
        "resolution": cfg.resolution,
        "restarts": cfg.restarts,
        "min_community_size": cfg.min_community_size,
        "top_words": cfg.top_words,
        "control_replicates": cfg.control_replicates,
        "inputs": {
            "corpus": _input_record(cfg.corpus),
            "lexicon": _input_record(cfg.lexicon),
            "aliases": _input_record(cfg.aliases),
            "stopwords": _input_record(cfg.stopwords),
            "daily_lists": _input_record(cfg.daily_lists),
        },
    }


# --- cross-corpus comparison -------------------------------------------------------------

COMPARE_FIELDS = (
    "documents",
    "nodes",
    "edges",
    "total_edge_weight",
    "mean_raw",
    "mean_backbone",
    "mean_raw_excluding_4_6",
    "community_min",
    "community_max",
    "n_communities",
)


def _comparison_row(name: str, s: dict) -> dict:
    comm = s.get("community", {}) or {}
    means = [c["mean_score"] for c in comm.get("communities") or [] if c.get("mean_score") is not None]
    base = comm.get("baselines") or {}
    return {
        "corpus": name,
        "documents": s["corpus"]["documents"],
        "nodes": s["corpus"]["nodes"],
        "edges": s["corpus"]["edges"],
        "total_edge_weight": s["corpus"]["total_edge_weight"],
        "mean_raw": base.get("raw"),
        "mean_backbone": base.get("backbone"),
        "mean_raw_excluding_4_6": base.get("raw_excluding_4_6"),
        "community_min": min(means) if means else None,
        "community_max": max(means) if means else None,
        "n_communities": len(comm.get("communities") or []),
        "opposing_sentiment": bool(comm.get("opposing_sentiment")),
    }


def compare_corpora(runs: Sequence[dict], names: Optional[Sequence[str]] = None) -> list[dict]:
    """Side-by-side table of run summaries with deltas against the first run."""
    if len(runs) < 2:
        raise ConfigError("compare needs at least two runs")
    bins = runs[0].get("bins")
    for r in runs[1:]:
        if r.get("bins") != bins:
            raise ConfigError("runs use incompatible histogram bin specs")
    names = list(names) if names else [f"run{i}" for i in range(len(runs))]
    rows = [_comparison_row(n, s) for n, s in zip(names, runs)]
    ref = rows[0]
    for row in rows:
        for f in COMPARE_FIELDS:
            a, b = row[f], ref[f]
            row[f"delta_{f}"] = (a - b) if a is not None and b is not None else None
    return rows


def write_comparison(rows: list[dict], path) -> None:
    cols = ["corpus"] + list(COMPARE_FIELDS) + ["opposing_sentiment"] + [f"delta_{f}" for f in COMPARE_FIELDS]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            vals = []
            for c in cols:
                v = r[c]
                if isinstance(v, bool):
                    vals.append(str(int(v)))
                elif isinstance(v, float):
                    vals.append(fmt_float(v))
                elif v is None:
                    vals.append("")
                else:
                    vals.append(str(v))
            fh.write(",".join(vals) + "\n")
