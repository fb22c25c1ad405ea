"""Deterministic synthetic rod-cell colony generator.

Produces phase-contrast-like intensity frames (dark rods on a bright
background), per-frame instance label masks, and the exact ground-truth
lineage graph of every growth and division event. Intended for desk-scale
pipeline tests; growth is geometric, not biophysically calibrated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lineage import LineageGraph, TrackRecord
from .model import ImageStack, LabelMaskStack

__all__ = ["SimParams", "simulate", "downsample", "downsample_graph"]

DIVISION_MODES = ("symmetric", "asymmetric-with-snap")

# Daughters shrink slightly at division so a septum gap separates them.
_SEPTUM_SHRINK = 0.92
_MAX_SEPARATION_ITERS = 100


@dataclass(frozen=True)
class SimParams:
    """Colony simulation parameters; identical seeds give identical output."""

    seed: int = 0
    frame_count: int = 10
    image_size: tuple[int, int] = (256, 256)  # (X, Y)
    initial_cells: int = 1
    initial_length: float = 12.0
    elongation_rate: float = 2.0
    division_length: float = 24.0
    division_mode: str = "symmetric"
    snap_angle_deg: float = 25.0
    drift_noise: float = 0.0
    cell_width: float = 5.0
    foreground: float = 60.0
    background: float = 200.0
    noise_sigma: float = 2.0

    def __post_init__(self):
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")
        if self.image_size[0] < 8 or self.image_size[1] < 8:
            raise ValueError("image_size too small")
        if self.initial_cells < 1:
            raise ValueError("initial_cells must be >= 1")
        if self.cell_width < 2.0:
            raise ValueError("cell_width below 2 px yields zero-area cells")
        if self.initial_length <= 0 or self.division_length <= 0:
            raise ValueError("lengths must be positive")
        if self.elongation_rate < 0 or self.drift_noise < 0 or self.noise_sigma < 0:
            raise ValueError("rates and noise levels must be >= 0")
        if self.division_mode not in DIVISION_MODES:
            raise ValueError(f"division_mode must be one of {DIVISION_MODES}")


@dataclass
class _Rod:
    id: int
    x: float
    y: float
    theta: float
    length: float


def _segment_endpoints(rod: _Rod, width: float) -> tuple[np.ndarray, np.ndarray]:
    half = max(rod.length - width, 0.0) / 2.0
    u = np.array([math.cos(rod.theta), math.sin(rod.theta)])
    c = np.array([rod.x, rod.y])
    return c - half * u, c + half * u


def _closest_points_segments(
    p1: np.ndarray, q1: np.ndarray, p2: np.ndarray, q2: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Distance and closest points between segments [p1,q1] and [p2,q2]."""
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)
    eps = 1e-12
    if a <= eps and e <= eps:
        s = t = 0.0
    elif a <= eps:
        s = 0.0
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = float(d1 @ r)
        if e <= eps:
            t = 0.0
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = float(d1 @ d2)
            denom = a * e - b * b
            s = min(max((b * f - c * e) / denom, 0.0), 1.0) if denom > eps else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)
    pa = p1 + s * d1
    pb = p2 + t * d2
    return float(np.linalg.norm(pb - pa)), pa, pb


def _separate_overlaps(rods: list[_Rod], width: float, bounds: tuple[int, int]) -> None:
    """Push overlapping rods apart along the line between closest points.

    Iterative pairwise relaxation; residual contact after the iteration cap
    is accepted (the rasterizer resolves contested pixels by distance).
    """
    for _ in range(_MAX_SEPARATION_ITERS):
        moved = False
        for i in range(len(rods)):
            for j in range(i + 1, len(rods)):
                a, b = rods[i], rods[j]
                reach = (a.length + b.length) / 2.0 + width
                if abs(a.x - b.x) > reach or abs(a.y - b.y) > reach:
                    continue
                p1, q1 = _segment_endpoints(a, width)
                p2, q2 = _segment_endpoints(b, width)
                dist, pa, pb = _closest_points_segments(p1, q1, p2, q2)
                overlap = width - dist
                if overlap <= 1e-9:
                    continue
                if dist > 1e-9:
                    direction = (pb - pa) / dist
                else:
                    # Degenerate contact: push perpendicular to rod a.
                    direction = np.array([-math.sin(a.theta), math.cos(a.theta)])
                shift = (overlap / 2.0 + 0.05) * direction
                a.x -= shift[0]
                a.y -= shift[1]
                b.x += shift[0]
                b.y += shift[1]
                moved = True
        _clamp_rods(rods, width, bounds)
        if not moved:
            break


def _clamp_rods(rods: list[_Rod], width: float, bounds: tuple[int, int]) -> None:
    size_x, size_y = bounds
    margin = width / 2.0 + 1.0
    for rod in rods:
        rod.x = min(max(rod.x, margin), size_x - 1 - margin)
        rod.y = min(max(rod.y, margin), size_y - 1 - margin)


def _render(
    rods: list[_Rod], params: SimParams, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    size_x, size_y = params.image_size
    mask = np.zeros((size_y, size_x), dtype=np.int32)
    best = np.full((size_y, size_x), np.inf)
    radius = params.cell_width / 2.0
    for rod in rods:
        p0, p1 = _segment_endpoints(rod, params.cell_width)
        x_lo = max(int(math.floor(min(p0[0], p1[0]) - radius - 1)), 0)
        x_hi = min(int(math.ceil(max(p0[0], p1[0]) + radius + 1)), size_x - 1)
        y_lo = max(int(math.floor(min(p0[1], p1[1]) - radius - 1)), 0)
        y_hi = min(int(math.ceil(max(p0[1], p1[1]) + radius + 1)), size_y - 1)
        if x_lo > x_hi or y_lo > y_hi:
            raise ValueError(f"cell {rod.id} left the image entirely")
        xs = np.arange(x_lo, x_hi + 1)
        ys = np.arange(y_lo, y_hi + 1)
        gx, gy = np.meshgrid(xs, ys)
        seg = p1 - p0
        seg_len2 = float(seg @ seg)
        px = gx - p0[0]
        py = gy - p0[1]
        if seg_len2 > 1e-12:
            proj = np.clip((px * seg[0] + py * seg[1]) / seg_len2, 0.0, 1.0)
        else:
            proj = np.zeros_like(px)
        dx = px - proj * seg[0]
        dy = py - proj * seg[1]
        dist = np.sqrt(dx * dx + dy * dy)
        inside = dist <= radius
        region = (slice(y_lo, y_hi + 1), slice(x_lo, x_hi + 1))
        # Contested pixels go to the rod whose axis is closest.
        claim = inside & (dist < best[region])
        best[region] = np.where(claim, dist, best[region])
        sub = mask[region]
        sub[claim] = rod.id
    present = set(np.unique(mask).tolist())
    for rod in rods:
        if rod.id not in present:
            raise ValueError(f"cell {rod.id} rasterized to zero pixels")
    image = np.full((size_y, size_x), params.background, dtype=np.float64)
    image[mask > 0] = params.foreground
    if params.noise_sigma > 0:
        image += rng.normal(0.0, params.noise_sigma, size=image.shape)
    return np.clip(image, 0.0, 255.0).astype(np.float32), mask


def _initial_rods(params: SimParams, rng: np.random.Generator) -> list[_Rod]:
    size_x, size_y = params.image_size
    cx, cy = (size_x - 1) / 2.0, (size_y - 1) / 2.0
    rods = []
    ring = 0.22 * min(size_x, size_y)
    for i in range(params.initial_cells):
        if params.initial_cells == 1:
            x, y = cx, cy
        else:
            angle = 2.0 * math.pi * i / params.initial_cells
            x = cx + ring * math.cos(angle)
            y = cy + ring * math.sin(angle)
        rods.append(
            _Rod(
                id=i + 1,
                x=x,
                y=y,
                theta=float(rng.uniform(0.0, math.pi)),
                length=params.initial_length,
            )
        )
    return rods


def simulate(params: SimParams) -> tuple[ImageStack, LabelMaskStack, LineageGraph]:
    """Run the colony simulation and return frames, masks, and truth.

    Rods elongate along their axis, divide once they reach the division
    length, and push neighbors aside. Mask labels equal lineage track ids.
    """
    rng = np.random.default_rng(params.seed)
    rods = _initial_rods(params, rng)
    next_id = len(rods) + 1
    # track id -> [birth_frame, end_frame, parent_id]
    records: dict[int, list[int]] = {rod.id: [1, 1, 0] for rod in rods}

    _clamp_rods(rods, params.cell_width, params.image_size)
    _separate_overlaps(rods, params.cell_width, params.image_size)
    frame, mask = _render(rods, params, rng)
    frames, masks = [frame], [mask]

    for t in range(2, params.frame_count + 1):
        for rod in rods:
            rod.length += params.elongation_rate
        survivors: list[_Rod] = []
        for rod in rods:
            if rod.length < params.division_length:
                survivors.append(rod)
                records[rod.id][1] = t
                continue
            records[rod.id][1] = t - 1
            if params.division_mode == "symmetric":
                fraction = 0.5
                tilt_a = tilt_b = 0.0
            else:
                fraction = float(rng.uniform(0.40, 0.47))
                snap = math.radians(params.snap_angle_deg)
                tilt_a = snap * float(rng.uniform(0.6, 1.0))
                tilt_b = -snap * float(rng.uniform(0.6, 1.0))
            u = np.array([math.cos(rod.theta), math.sin(rod.theta)])
            offsets = ((fraction - 1.0) / 2.0, fraction / 2.0)
            lengths = (fraction * rod.length, (1.0 - fraction) * rod.length)
            tilts = (tilt_a, tilt_b)
            for offset, length, tilt in zip(offsets, lengths, tilts):
                child = _Rod(
                    id=next_id,
                    x=rod.x + offset * rod.length * u[0],
                    y=rod.y + offset * rod.length * u[1],
                    theta=rod.theta + tilt,
                    length=max(length * _SEPTUM_SHRINK, params.cell_width),
                )
                records[child.id] = [t, t, rod.id]
                survivors.append(child)
                next_id += 1
        rods = survivors
        if params.drift_noise > 0:
            for rod in rods:
                rod.x += float(rng.normal(0.0, params.drift_noise))
                rod.y += float(rng.normal(0.0, params.drift_noise))
        _clamp_rods(rods, params.cell_width, params.image_size)
        _separate_overlaps(rods, params.cell_width, params.image_size)
        frame, mask = _render(rods, params, rng)
        frames.append(frame)
        masks.append(mask)

    tracks = [
        TrackRecord(
            track_id=tid,
            begin_frame=birth,
            end_frame=end,
            parent_id=parent,
            member_cells=[(f, tid) for f in range(birth, end + 1)],
        )
        for tid, (birth, end, parent) in sorted(records.items())
    ]
    graph = LineageGraph(tracks=tracks, frame_count=params.frame_count)
    graph.validate()
    stack = ImageStack(frames, frame_interval=1.0)
    return stack, LabelMaskStack(masks), graph


def downsample_graph(gt: LineageGraph, factor: int) -> LineageGraph:
    """Contract a lineage graph onto frames 1, 1+factor, 1+2*factor, ...

    Tracks without any kept frame are elided; their children reattach to the
    nearest surviving ancestor. Track ids are preserved; frame indices are
    renumbered to the kept subsequence.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    kept = list(range(1, gt.frame_count + 1, factor))
    new_index = {old: i + 1 for i, old in enumerate(kept)}
    by_id = {t.track_id: t for t in gt.tracks}

    def survives(track: TrackRecord) -> bool:
        return any(f in new_index for f, _ in track.member_cells)

    def surviving_ancestor(track: TrackRecord) -> int:
        parent_id = track.parent_id
        while parent_id:
            parent = by_id[parent_id]
            if survives(parent):
                return parent_id
            parent_id = parent.parent_id
        return 0

    tracks = []
    for track in gt.tracks:
        members = [(new_index[f], label) for f, label in track.member_cells if f in new_index]
        if not members:
            continue
        tracks.append(
            TrackRecord(
                track_id=track.track_id,
                begin_frame=members[0][0],
                end_frame=members[-1][0],
                parent_id=surviving_ancestor(track),
                member_cells=members,
            )
        )
    graph = LineageGraph(tracks=tracks, frame_count=len(kept))
    graph.validate()
    return graph


def downsample(
    stack: ImageStack,
    masks: LabelMaskStack,
    gt: LineageGraph,
    factor: int,
) -> tuple[ImageStack, LabelMaskStack, LineageGraph]:
    """Emulate a slower acquisition by keeping every factor-th frame."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if not (stack.count == masks.count == gt.frame_count):
        raise ValueError("stack, masks, and graph must cover the same frames")
    kept = range(0, stack.count, factor)
    new_stack = ImageStack(
        [stack.frames[i].copy() for i in kept],
        frame_interval=stack.frame_interval * factor,
        intensity_range=stack.intensity_range,
    )
    new_masks = LabelMaskStack([masks.masks[i].copy() for i in kept])
    return new_stack, new_masks, downsample_graph(gt, factor)
