"""Shared test utilities: independent oracles and graph comparison."""
from __future__ import annotations

import math

import numpy as np

from actrack.assignment import CostMatrix, FramePairAssignment
from actrack.lineage import LineageGraph
from actrack.model import CellInstance


def make_instance(label, centroid, area=10, activity=None, frame_index=1):
    return CellInstance(
        frame_index=frame_index,
        label=label,
        centroid=(float(centroid[0]), float(centroid[1])),
        area=int(area),
        activity=activity,
    )


def pairs_cost(C: CostMatrix, pairs) -> float:
    """Summed real cost of a matching, in a canonical order."""
    return math.fsum(C.entries[r, c] for r, c in sorted(pairs))


def pixelwise_std_oracle(frames: list[np.ndarray], t: int, n_minus: int, n_plus: int) -> np.ndarray:
    """Definition-of-variance recomputation, explicit python loops per pixel."""
    n = len(frames)
    lo = max(t - n_minus, 1)
    hi = min(t + n_plus, n)
    window = [np.asarray(f, dtype=np.float64) for f in frames[lo - 1 : hi]]
    height, width = window[0].shape
    out = np.zeros((height, width))
    count = len(window)
    for y in range(height):
        for x in range(width):
            samples = [w[y, x] for w in window]
            mean = sum(samples) / count
            var = sum((s - mean) ** 2 for s in samples) / count
            out[y, x] = math.sqrt(var)
    return out


def min_cost_two_daughter_oracle(losses: np.ndarray) -> tuple[float, list[tuple[int, int]]]:
    """Exhaustive minimum summed loss assigning each mother <= 2 daughters.

    ``losses`` is the plain (m x d) loss matrix (no row doubling). Exactly
    min(2m, d) links must be used. Recursive enumeration over daughters with
    an admissible bound (losses are negative, so partial sums alone cannot
    prune). Returns the minimum cost and one optimal (mother, daughter)
    index set.
    """
    m, d = losses.shape
    target = min(2 * m, d)
    best = [math.inf]
    best_links: list[list[tuple[int, int]]] = [[]]
    # most negative loss each daughter could contribute, ignoring capacity
    min_add = losses.min(axis=0)
    # bound_from[j][r]: lowest possible sum of r assignments among daughters j..
    bound_from = []
    for j in range(d + 1):
        tail = sorted(min_add[j:])
        sums = [0.0]
        for value in tail:
            sums.append(sums[-1] + min(value, 0.0))
        bound_from.append(sums)

    def recurse(j: int, used: int, counts: list[int], total: float,
                links: list[tuple[int, int]]) -> None:
        remaining = d - j
        slots = target - used
        if remaining < slots:
            return
        bound = total + bound_from[j][min(slots, remaining)]
        if bound >= best[0]:
            return
        if j == d:
            best[0] = total
            best_links[0] = list(links)
            return
        recurse(j + 1, used, counts, total, links)
        for i in range(m):
            if counts[i] < 2:
                counts[i] += 1
                links.append((i, j))
                recurse(j + 1, used + 1, counts, total + losses[i, j], links)
                links.pop()
                counts[i] -= 1

    recurse(0, 0, [0] * m, 0.0, [])
    return best[0], best_links[0]


def canonical_tracks(graph: LineageGraph):
    """Id-free structural form: set of (members, parent members) pairs."""
    by_id = {t.track_id: t for t in graph.tracks}
    out = set()
    for track in graph.tracks:
        members = tuple(track.member_cells)
        parent = (
            tuple(by_id[track.parent_id].member_cells) if track.parent_id else None
        )
        out.add((members, parent))
    return out


def assignments_from_graph(gt: LineageGraph) -> list[FramePairAssignment]:
    """Perfect frame-pair assignments replayed from a ground-truth graph."""
    label_at = [dict() for _ in range(gt.frame_count)]  # frame -> track_id -> label
    for track in gt.tracks:
        for frame, label in track.member_cells:
            label_at[frame - 1][track.track_id] = label
    children = {}
    for track in gt.tracks:
        if track.parent_id:
            children.setdefault(track.parent_id, []).append(track)
    out = []
    for t in range(1, gt.frame_count):
        asg = FramePairAssignment()
        for track in gt.tracks:
            if track.begin_frame <= t <= track.end_frame:
                if track.end_frame > t:
                    asg.growth_links.append(
                        (label_at[t - 1][track.track_id], label_at[t][track.track_id])
                    )
                else:
                    kids = [c for c in children.get(track.track_id, []) if c.begin_frame == t + 1]
                    if kids:
                        daughters = sorted(label_at[t][k.track_id] for k in kids)
                        asg.division_links.append(
                            (label_at[t - 1][track.track_id], *daughters)
                        )
                    else:
                        asg.disappeared.append(label_at[t - 1][track.track_id])
            elif track.begin_frame == t + 1 and not track.parent_id:
                asg.appeared.append(label_at[t][track.track_id])
        asg.division_links.sort()
        asg.appeared.sort()
        asg.disappeared.sort()
        out.append(asg)
    return out
