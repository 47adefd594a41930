"""Context-aware sensor search: filtering, weighted ranking, pruning, and
distributed retrieval strategies over property corpora."""

from .core import (Polarity, PropertyDef, PropertyRegistry, SensorDescription,
                   canonical_registry, normalize, normalized_vector,
                   register_observation)
from .corpus import Corpus, GeneratorConfig, generate, load, save
from .distributed import (ClusterTopology, SearchOutcome, analytic_saving,
                          chain_total_ns, fit_record_size, load_topology,
                          parallel_remote_ns, saving_grid, search_chain,
                          search_parallel, search_parallel_k,
                          simulate_timeline, uniform_topology)
from .engine import Engine, parse_search_request
from .errors import (ConfigError, EmptyPriority, InvalidFilter, InvalidK,
                     InvalidRequest, KeyMismatch, LoadError, MissingProperty,
                     NoCorpus, OutOfBounds, ParseError, SensorSearchError,
                     SimFault, UnknownProperty)
from .pipeline import SearchRequest, run_search
from .query import (CategoricalEq, Comparison, FilterExpr, RangeUnion,
                    count_matches, evaluate, evaluate_indices, parse_filter)
from .ranking import (IdealSensor, PriorityEntry, PrioritySpec, RankedEntry,
                      RankedResult, WeightVector, compute_weights, cphf_accuracy,
                      cphf_prune, cpwi, default_ideal, ideal_from_native,
                      rank_and_select)

__version__ = "0.1.0"

__all__ = [
    "Polarity", "PropertyDef", "PropertyRegistry", "SensorDescription",
    "canonical_registry", "normalize", "normalized_vector",
    "register_observation",
    "Corpus", "GeneratorConfig", "generate", "load", "save",
    "ClusterTopology", "SearchOutcome", "analytic_saving", "chain_total_ns",
    "fit_record_size", "load_topology", "parallel_remote_ns", "saving_grid",
    "search_chain", "search_parallel", "search_parallel_k",
    "simulate_timeline", "uniform_topology",
    "Engine", "parse_search_request",
    "ConfigError", "EmptyPriority", "InvalidFilter", "InvalidK",
    "InvalidRequest", "KeyMismatch", "LoadError", "MissingProperty",
    "NoCorpus", "OutOfBounds", "ParseError", "SensorSearchError", "SimFault",
    "UnknownProperty",
    "SearchRequest", "run_search",
    "CategoricalEq", "Comparison", "FilterExpr", "RangeUnion",
    "count_matches", "evaluate", "evaluate_indices", "parse_filter",
    "IdealSensor", "PriorityEntry", "PrioritySpec", "RankedEntry",
    "RankedResult", "WeightVector", "compute_weights", "cphf_accuracy",
    "cphf_prune", "cpwi", "default_ideal", "ideal_from_native",
    "rank_and_select",
    "__version__",
]
