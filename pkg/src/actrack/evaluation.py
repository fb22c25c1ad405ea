"""Lineage scoring with the acyclic oriented graph matching (AOGM) measure.

The score counts the weighted graph operations needed to turn a predicted
lineage into the ground truth: vertex fixes (splits, false negatives, false
positives) and edge fixes (deletions, additions, semantics changes). TRA
normalizes it against the cost of building the ground truth from scratch.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .lineage import LineageGraph
from .model import LabelMaskStack

__all__ = [
    "PenaltyWeights",
    "GraphDiff",
    "VertexMatch",
    "match_vertices",
    "graph_edges",
    "aogm_score",
    "tra",
]

Vertex = tuple[int, int]  # (frame_index, label)
Edge = tuple[Vertex, Vertex]

EDGE_TRACK = "track"
EDGE_PARENT = "parent"


@dataclass(frozen=True)
class PenaltyWeights:
    """Operation weights for the AOGM sum."""

    split_vertex: float = 5.0
    false_negative_vertex: float = 10.0
    false_positive_vertex: float = 1.0
    redundant_edge: float = 1.0
    missing_edge: float = 1.5
    wrong_semantics_edge: float = 1.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class GraphDiff:
    """Operation counts and the resulting AOGM values."""

    ns: int
    fn: int
    fp: int
    ed: int
    ea: int
    ec: int
    aogm: float
    aogm_empty: float


@dataclass
class VertexMatch:
    """Per-frame correspondence between ground-truth and result instances."""

    gt_to_res: dict[Vertex, Vertex]
    gt_vertices: set[Vertex]
    res_vertices: set[Vertex]


def match_vertices(gt_masks: LabelMaskStack, res_masks: LabelMaskStack) -> VertexMatch:
    """Match instances by majority pixel overlap.

    A ground-truth instance g is matched to the result instance r covering
    strictly more than half of g's pixels; such an r is unique when it
    exists. Result instances absorbing several ground-truth instances count
    as merges downstream.
    """
    if gt_masks.count != res_masks.count:
        raise ValueError(
            f"frame counts differ: gt {gt_masks.count}, result {res_masks.count}"
        )
    if gt_masks.shape != res_masks.shape:
        raise ValueError(
            f"mask shapes differ: gt {gt_masks.shape}, result {res_masks.shape}"
        )
    gt_to_res: dict[Vertex, Vertex] = {}
    gt_vertices: set[Vertex] = set()
    res_vertices: set[Vertex] = set()
    for index, (gt, res) in enumerate(zip(gt_masks.masks, res_masks.masks)):
        t = index + 1
        res_vertices.update((t, int(l)) for l in np.unique(res[res > 0]))
        inside = gt > 0
        gt_labels = gt[inside]
        if gt_labels.size == 0:
            continue
        res_labels = res[inside]
        areas = Counter(gt_labels.tolist())
        overlaps = Counter(zip(gt_labels.tolist(), res_labels.tolist()))
        gt_vertices.update((t, int(g)) for g in areas)
        for (g, r), count in overlaps.items():
            if r > 0 and count * 2 > areas[g]:
                gt_to_res[(t, int(g))] = (t, int(r))
    return VertexMatch(gt_to_res=gt_to_res, gt_vertices=gt_vertices, res_vertices=res_vertices)


def graph_edges(graph: LineageGraph) -> dict[Edge, str]:
    """All lineage edges keyed by endpoint vertices, valued by kind.

    Track-internal edges join consecutive members of one track; parent edges
    join a mother track's last cell to each child's first cell.
    """
    edges: dict[Edge, str] = {}
    by_id = {t.track_id: t for t in graph.tracks}
    for track in graph.tracks:
        members = track.member_cells
        for a, b in zip(members, members[1:]):
            edges[(a, b)] = EDGE_TRACK
        if track.parent_id:
            parent = by_id[track.parent_id]
            edges[(parent.member_cells[-1], members[0])] = EDGE_PARENT
    return edges


def aogm_score(
    gt: LineageGraph,
    res: LineageGraph,
    match: VertexMatch,
    weights: PenaltyWeights = PenaltyWeights(),
) -> GraphDiff:
    """Count the transformations turning the result graph into the truth."""
    matched_res = Counter(match.gt_to_res.values())
    ns = sum(count - 1 for count in matched_res.values() if count > 1)
    fn = sum(1 for v in match.gt_vertices if v not in match.gt_to_res)
    fp = sum(1 for v in match.res_vertices if v not in matched_res)

    gt_edges = graph_edges(gt)
    res_edges = graph_edges(res)

    ea = ec = 0
    mapped_gt_edges: set[Edge] = set()
    for (a, b), kind in gt_edges.items():
        ra = match.gt_to_res.get(a)
        rb = match.gt_to_res.get(b)
        if ra is None or rb is None or (ra, rb) not in res_edges:
            ea += 1
            continue
        mapped_gt_edges.add((ra, rb))
        if res_edges[(ra, rb)] != kind:
            ec += 1
    ed = sum(1 for edge in res_edges if edge not in mapped_gt_edges)

    aogm = (
        weights.split_vertex * ns
        + weights.false_negative_vertex * fn
        + weights.false_positive_vertex * fp
        + weights.redundant_edge * ed
        + weights.missing_edge * ea
        + weights.wrong_semantics_edge * ec
    )
    aogm_empty = (
        weights.false_negative_vertex * len(match.gt_vertices)
        + weights.missing_edge * len(gt_edges)
    )
    return GraphDiff(ns=ns, fn=fn, fp=fp, ed=ed, ea=ea, ec=ec, aogm=aogm, aogm_empty=aogm_empty)


def tra(
    gt: LineageGraph,
    res: LineageGraph,
    match: VertexMatch,
    weights: PenaltyWeights = PenaltyWeights(),
) -> float:
    """Tracking accuracy: 1 - min(AOGM, AOGM_empty) / AOGM_empty.

    An empty ground truth scores 1 against an empty result and 0 otherwise.
    """
    diff = aogm_score(gt, res, match, weights)
    if diff.aogm_empty == 0:
        return 1.0 if not match.res_vertices else 0.0
    return 1.0 - min(diff.aogm, diff.aogm_empty) / diff.aogm_empty
