"""Structure-quality metrics for generated ligands."""

from .conformer import ConformerMatch, DEConfig, TorsionModel, conformer_match, same_graph
from .histograms import (
    ALL_ATOM,
    ANGLE_BIN,
    CARBON_CARBON,
    DEFAULT_PATTERNS,
    DISTANCE_BIN,
    DISTANCE_MAX,
    AnglePattern,
    Histogram,
    angle_hist,
    bond_angles,
    distance_hist,
    jsd,
    pair_distances,
    parse_pattern,
)
from .mw import MIN_MOLECULES, MwRange, mw_filter, mw_range, mw_ranges, trimmed
from .report import EvalConfig, MetricReport, check_pairs, evaluate, match_all, prepare_docking_inputs, summarize

__all__ = [
    "ALL_ATOM", "ANGLE_BIN", "AnglePattern", "CARBON_CARBON", "ConformerMatch", "DEConfig", "DEFAULT_PATTERNS",
    "DISTANCE_BIN", "DISTANCE_MAX", "EvalConfig", "Histogram", "MIN_MOLECULES", "MetricReport", "MwRange",
    "TorsionModel", "angle_hist", "bond_angles", "check_pairs", "conformer_match", "distance_hist", "evaluate",
    "jsd", "match_all", "mw_filter", "mw_range", "mw_ranges", "pair_distances", "parse_pattern",
    "prepare_docking_inputs", "same_graph", "summarize", "trimmed",
]
