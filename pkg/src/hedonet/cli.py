"""Command line entry point: ``hedonet <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, DataError, HedonetError
from .nullmodels import CLI_KINDS, KINDS
from .pipeline import (
    OUTPUT_ENV,
    PipelineConfig,
    compare_corpora,
    read_json,
    run_pipeline,
    stage_backbone,
    stage_community,
    stage_graph,
    stage_ingest,
    stage_nullmodels,
    write_comparison,
    write_json,
)

log = logging.getLogger("hedonet")


def _csv_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _float_list(value: str) -> list[float]:
    try:
        return [float(v) for v in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {value!r}") from None


def _null_models(value: str) -> list[str]:
    out = []
    for v in _csv_list(value):
        if v == "all":
            out.extend(KINDS)
        elif v == "none":
            continue
        elif v in CLI_KINDS:
            out.append(CLI_KINDS[v])
        elif v in KINDS:
            out.append(v)
        else:
            raise argparse.ArgumentTypeError(f"unknown null model {v!r}")
    return list(dict.fromkeys(out))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    p.add_argument("--out", dest="output_dir", type=Path, help=f"output directory (env {OUTPUT_ENV} as fallback)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_ingest(p):
    p.add_argument("--corpus", type=Path, help="JSON-lines (id, text) or plain text, one document per line")
    p.add_argument("--input-format", choices=("jsonl", "txt"))
    p.add_argument("--anchors", type=_csv_list, help="comma-separated anchor words to drop")
    p.add_argument("--remove-words", type=_csv_list, help="comma-separated extra words to drop")


def _add_graph(p):
    p.add_argument("--lexicon", type=Path, help="TSV with word, happs, stddev columns")
    p.add_argument("--aliases", type=Path, help="TSV with word, expansion columns")
    p.add_argument("--require-scores", action="store_true", default=None, help="drop unscored words before building")
    p.add_argument("--no-graphml", dest="graphml", action="store_false", default=None)


def _add_null(p):
    p.add_argument("--null-model", dest="null_models", type=_null_models, help="config,er,shuffle,uniform | all | none")
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int, help="root seed")


def _add_backbone(p):
    p.add_argument("--backbone", choices=("disparity", "nc", "none"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--sweep", type=_float_list, help="comma-separated disparity levels; empty string disables")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--stopwords", type=Path, help="one stop word per line")
    src.add_argument("--daily-lists", type=Path, help="directory of daily top-word lists, one word per line")
    p.add_argument("--top-degree", type=int)


def _add_community(p, with_seed=True):
    if with_seed:
        p.add_argument("--seed", type=int, help="root seed")
    p.add_argument("--resolution", type=float)
    p.add_argument("--restarts", type=int, help="Louvain runs per seed; the best modularity wins")
    p.add_argument("--min-community-size", type=int)
    p.add_argument("--top-words", type=int)
    p.add_argument("--control-replicates", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hedonet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a raw corpus")
    _add_common(p)
    _add_ingest(p)

    p = sub.add_parser("graph", help="build the co-occurrence network from a parsed corpus")
    _add_common(p)
    _add_graph(p)

    p = sub.add_parser("nullmodel", help="generate null-model replicates of the network")
    _add_common(p)
    _add_null(p)

    p = sub.add_parser("backbone", help="remove hubs and filter edges")
    _add_common(p)
    _add_backbone(p)

    p = sub.add_parser("community", help="Louvain communities and score attribution on the backbone")
    _add_common(p)
    _add_community(p)

    p = sub.add_parser("run", help="full pipeline")
    _add_common(p)
    _add_ingest(p)
    _add_graph(p)
    _add_null(p)
    _add_backbone(p)
    _add_community(p, with_seed=False)

    p = sub.add_parser("compare", help="compare finished runs")
    p.add_argument("runs", nargs="+", type=Path, help="run output directories")
    p.add_argument("--out", dest="output_dir", type=Path, required=True, help="directory for comparison.csv/json")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


CONFIG_KEYS = {
    "corpus",
    "input_format",
    "anchors",
    "remove_words",
    "lexicon",
    "aliases",
    "require_scores",
    "graphml",
    "null_models",
    "replicates",
    "seed",
    "backbone",
    "alpha",
    "delta",
    "sweep",
    "stopwords",
    "daily_lists",
    "top_degree",
    "resolution",
    "restarts",
    "min_community_size",
    "top_words",
    "control_replicates",
}


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    data: dict = {}
    if getattr(args, "config", None) is not None:
        if not args.config.exists():
            raise ConfigError(f"config file not found: {args.config}")
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        base = args.config.parent
        for k in ("corpus", "lexicon", "aliases", "stopwords", "daily_lists", "output_dir"):
            if data.get(k) is not None and not Path(data[k]).is_absolute():
                data[k] = str(base / data[k])
    env_out = os.environ.get(OUTPUT_ENV)
    if env_out:
        data["output_dir"] = env_out
    for key in CONFIG_KEYS | {"output_dir"}:
        v = getattr(args, key, None)
        if v is not None:
            data[key] = v
    return PipelineConfig.from_mapping(data)


def _print_summary(summary: dict) -> None:
    json.dump(summary, sys.stdout, indent=2, sort_keys=True, default=str)
    sys.stdout.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "compare":
            runs, names = [], []
            for d in args.runs:
                f = d / "run_summary.json"
                if not f.exists():
                    raise ConfigError(f"no run_summary.json in {d}")
                runs.append(read_json(f))
                names.append(d.name)
            rows = compare_corpora(runs, names)
            args.output_dir.mkdir(parents=True, exist_ok=True)
            write_comparison(rows, args.output_dir / "comparison.csv")
            write_json(args.output_dir / "comparison.json", rows)
            for r in rows:
                flag = "opposing sentiment" if r["opposing_sentiment"] else "-"
                print(f"{r['corpus']}\tnodes={r['nodes']}\tedges={r['edges']}\t{flag}")
            return 0
        cfg = config_from_args(args)
        stages = {
            "ingest": (("ingest",), stage_ingest),
            "graph": (("graph",), stage_graph),
            "nullmodel": ((), stage_nullmodels),
            "backbone": ((), stage_backbone),
            "community": ((), stage_community),
        }
        if args.command == "run":
            summary = run_pipeline(cfg)
            print(f"wrote {cfg.output_dir}")
            _print_summary({"corpus": summary["corpus"], "community": {"n_communities": summary["community"]["n_communities"]}})
            return 0
        needed, fn = stages[args.command]
        cfg.validate(needed)
        _print_summary(fn(cfg))
        return 0
    except HedonetError as exc:
        print(f"hedonet: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        # Library-level argument errors surface as config errors.
        print(f"hedonet: error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
