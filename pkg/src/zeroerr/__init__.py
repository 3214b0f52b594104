"""Zero-error capacity, code numbering and remote state estimation over DMCs."""

from .channel import (
    AlphabetPair,
    Channel,
    ZeroPattern,
    all_patterns,
    in_w0,
    load_channel,
    noiseless,
    s_min,
    typewriter,
    validate_channel,
    zero_pattern,
)
from .codes import Code, anti_code, delta, gamma, gamma_inverse, is_zero_error, make_code
from .decide import InstabilityExponent, Outcome, Plant, decide_solvability, instability_exponent
from .exact import Radical
from .graphs import Graph, capacity_bounds, confusability_graph, independence_number, strong_power
from .search import construct_code, search_minimal_gamma, verify_code

__all__ = [
    "AlphabetPair",
    "Channel",
    "Code",
    "Graph",
    "InstabilityExponent",
    "Outcome",
    "Plant",
    "Radical",
    "ZeroPattern",
    "all_patterns",
    "anti_code",
    "capacity_bounds",
    "confusability_graph",
    "construct_code",
    "decide_solvability",
    "delta",
    "gamma",
    "gamma_inverse",
    "in_w0",
    "independence_number",
    "instability_exponent",
    "is_zero_error",
    "load_channel",
    "make_code",
    "noiseless",
    "s_min",
    "search_minimal_gamma",
    "strong_power",
    "typewriter",
    "validate_channel",
    "verify_code",
    "zero_pattern",
]
