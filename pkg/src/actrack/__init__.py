"""Activity-prioritized cell tracking for microbial time-lapse microscopy."""

from .activity import (
    StdField,
    activity_frame,
    cell_activity,
    frame_activities,
    moving_std,
    normalize_stack,
    render_activity_map,
)
from .assignment import (
    CostMatrix,
    FramePairAssignment,
    assign_frame_pair,
    brute_force_lap,
    build_cost_matrix,
    lap_solve,
    stage1_greedy,
)
from .evaluation import (
    GraphDiff,
    PenaltyWeights,
    VertexMatch,
    aogm_score,
    match_vertices,
    tra,
)
from .lineage import LineageGraph, TrackRecord, accumulate, relabel_masks
from .linking import LinkCandidate, LinkConfig, candidates_for, gaussian_value, sigma_of
from .model import (
    CellInstance,
    ImageStack,
    LabelMaskStack,
    apply_min_area,
    extract_instances,
    filter_min_area,
)
from .pipeline import TrackingResult, track_stack
from .synthgen import SimParams, downsample, downsample_graph, simulate

__version__ = "0.1.0"

__all__ = [
    "CellInstance",
    "CostMatrix",
    "FramePairAssignment",
    "GraphDiff",
    "ImageStack",
    "LabelMaskStack",
    "LineageGraph",
    "LinkCandidate",
    "LinkConfig",
    "PenaltyWeights",
    "SimParams",
    "StdField",
    "TrackRecord",
    "TrackingResult",
    "VertexMatch",
    "accumulate",
    "activity_frame",
    "aogm_score",
    "apply_min_area",
    "assign_frame_pair",
    "brute_force_lap",
    "build_cost_matrix",
    "candidates_for",
    "cell_activity",
    "downsample",
    "downsample_graph",
    "extract_instances",
    "filter_min_area",
    "frame_activities",
    "gaussian_value",
    "lap_solve",
    "match_vertices",
    "moving_std",
    "normalize_stack",
    "relabel_masks",
    "render_activity_map",
    "sigma_of",
    "simulate",
    "stage1_greedy",
    "tra",
    "track_stack",
]
