"""Word co-occurrence networks scored with a happiness lexicon.

Build the network from short documents, extract its backbone, find word
communities and attribute sentiment to them.
"""

__version__ = "0.1.0"

from .backbone import derive_stopwords, disparity_filter, noise_corrected_filter, remove_hubs, threshold_sweep
from .community import baseline_scores, community_report, louvain, modularity, shuffled_community_control
from .corpus import ParserConfig, RawDocument, parse_corpus, parse_document
from .graph import WeightedGraph, assortativity, build_graph, components, degree_strength
from .histograms import BinSpec, score_profiles
from .lexicon import Lexicon, deviation_weight, load_lexicon, score_of
from .nullmodels import configuration_model, erdos_renyi_model, shuffle_scores, uniform_scores

__all__ = [
    "BinSpec",
    "Lexicon",
    "ParserConfig",
    "RawDocument",
    "WeightedGraph",
    "assortativity",
    "baseline_scores",
    "build_graph",
    "community_report",
    "components",
    "configuration_model",
    "degree_strength",
    "derive_stopwords",
    "deviation_weight",
    "disparity_filter",
    "erdos_renyi_model",
    "load_lexicon",
    "louvain",
    "modularity",
    "noise_corrected_filter",
    "parse_corpus",
    "parse_document",
    "remove_hubs",
    "score_of",
    "score_profiles",
    "shuffle_scores",
    "shuffled_community_control",
    "threshold_sweep",
    "uniform_scores",
]
