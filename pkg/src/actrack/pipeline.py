"""End-to-end tracking of an image/mask stack pair."""
from __future__ import annotations

from dataclasses import dataclass, field

from .activity import activity_frame, normalize_stack
from .assignment import FramePairAssignment, assign_frame_pair
from .lineage import LineageGraph, accumulate, relabel_masks
from .linking import LinkConfig
from .model import CellInstance, ImageStack, LabelMaskStack, apply_min_area

__all__ = ["TrackingResult", "track_stack"]


@dataclass
class TrackingResult:
    graph: LineageGraph
    relabeled: LabelMaskStack
    assignments: list[FramePairAssignment]
    instances_per_frame: list[list[CellInstance]]
    intensity_range: tuple[float, float] = field(default=(0.0, 0.0))


def track_stack(
    stack: ImageStack,
    masks: LabelMaskStack,
    config: LinkConfig = LinkConfig(),
    min_area: int = 0,
) -> TrackingResult:
    """Track all frame pairs and assemble the lineage graph.

    Intensities are min-max normalized first (a no-op for already normalized
    stacks), undersized instances are dropped from the masks, every frame
    pair is assigned, and the resulting links are folded into tracks. The
    relabeled masks carry track ids.
    """
    if stack.count != masks.count or stack.shape != masks.shape:
        raise ValueError("image and mask stacks must have matching geometry")
    normalized, intensity_range = normalize_stack(stack)
    cleaned = apply_min_area(masks, min_area)
    instances = [
        activity_frame(normalized, cleaned, t) for t in range(1, stack.count + 1)
    ]
    assignments = [
        assign_frame_pair(instances[t - 1], instances[t], config)
        for t in range(1, stack.count)
    ]
    graph = accumulate(assignments, instances)
    relabeled = relabel_masks(graph, cleaned)
    return TrackingResult(
        graph=graph,
        relabeled=relabeled,
        assignments=assignments,
        instances_per_frame=instances,
        intensity_range=intensity_range,
    )
