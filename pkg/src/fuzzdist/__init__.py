"""fuzzdist: distance guidance toolkit for directed grey-box fuzzing.

The package computes call-graph and control-flow distances toward target
source locations, reshapes them with externally supplied line scores,
audits both distance distributions, and replays guided fuzzing campaigns
in a deterministic simulator.
"""

from .attention import AttentionConfig, attention_distances
from .distribution import (ComparisonReport, DistributionReport, analyze,
                           compare)
from .errors import InputError, ParseError, ValidationError
from .graphs import (BasicBlock, CallGraph, Cfg, ProgramGraphs, SourceLoc,
                     TargetSpec, block_key, load_program, load_targets_file,
                     resolve_targets, save_program)
from .physical import (DistanceConfig, DistanceMap, FunctionDistanceMap,
                       block_distances, format_distance, function_distances,
                       load_distance_csv, write_distance_csv)
from .scoring import (BlockScoreTable, LineScoreTable, block_raw_scores,
                      load_line_scores, normalize_scores)

__version__ = "0.1.0"

__all__ = [
    "AttentionConfig", "BasicBlock", "BlockScoreTable", "CallGraph", "Cfg",
    "ComparisonReport", "DistanceConfig", "DistanceMap", "DistributionReport",
    "FunctionDistanceMap", "InputError", "LineScoreTable", "ParseError",
    "ProgramGraphs", "SourceLoc", "TargetSpec", "ValidationError", "analyze",
    "attention_distances", "block_distances", "block_key", "block_raw_scores",
    "compare", "format_distance", "function_distances", "load_distance_csv",
    "load_line_scores", "load_program", "load_targets_file",
    "normalize_scores", "resolve_targets", "save_program",
    "write_distance_csv",
]
