"""Moving pixel-wise standard deviation and per-cell activity values.

The per-cell activity is the mask-integrated, area-normalized temporal
standard deviation of the intensity signal: a proxy for motion, growth and
division likelihood that needs no tracking information.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import CellInstance, ImageStack, LabelMaskStack, extract_instances

__all__ = [
    "StdField",
    "TRACKING_WINDOW",
    "normalize_stack",
    "moving_std",
    "cell_activity",
    "frame_activities",
    "activity_frame",
    "render_activity_map",
]

# Window used on the tracking path: the current frame and its successor.
TRACKING_WINDOW = (0, 1)

# Target intensity range after per-stack min-max normalization. A fixed
# input range keeps the Gaussian scaling parameter transferable across
# source bit depths.
NORMALIZED_MAX = 255.0


@dataclass(frozen=True)
class StdField:
    """Pixel-wise temporal standard deviation for one frame.

    ``window`` stores the requested (n_minus, n_plus); the actual frame
    interval is clamped to the stack borders.
    """

    frame_index: int
    values: np.ndarray  # float32, >= 0
    window: tuple[int, int]


def normalize_stack(stack: ImageStack) -> tuple[ImageStack, tuple[float, float]]:
    """Min-max normalize all frames jointly to [0, 255].

    Returns the normalized stack and the original (lo, hi) bounds, which are
    also recorded on the returned stack. A constant stack maps to all zeros.
    """
    lo = min(float(f.min()) for f in stack.frames)
    hi = max(float(f.max()) for f in stack.frames)
    if hi > lo:
        scale = NORMALIZED_MAX / (hi - lo)
        frames = [
            ((f.astype(np.float64) - lo) * scale).astype(np.float32)
            for f in stack.frames
        ]
    else:
        frames = [np.zeros(stack.shape, dtype=np.float32) for _ in stack.frames]
    out = ImageStack(frames, frame_interval=stack.frame_interval, intensity_range=(lo, hi))
    return out, (lo, hi)


def moving_std(stack: ImageStack, t: int, n_minus: int, n_plus: int) -> StdField:
    """Population standard deviation per pixel over frames around t.

    The window covers frames max(t - n_minus, 1) .. min(t + n_plus, N)
    (1-based, inclusive) and the variance is divided by the clamped window
    length. A window that degenerates to a single frame gives all zeros.
    """
    if not 1 <= t <= stack.count:
        raise ValueError(f"frame index {t} outside [1, {stack.count}]")
    if n_minus < 0 or n_plus < 0:
        raise ValueError("window extents must be >= 0")
    lo = max(t - n_minus, 1)
    hi = min(t + n_plus, stack.count)
    window = np.stack(stack.frames[lo - 1 : hi], axis=0).astype(np.float64)
    values = np.std(window, axis=0).astype(np.float32)
    return StdField(frame_index=t, values=values, window=(n_minus, n_plus))


def cell_activity(std_field: StdField, mask: np.ndarray, label: int) -> float:
    """Mean of the std field over the pixels of one instance.

    Equivalent to integrating the field over the instance mask and dividing
    by the area, which removes the direct influence of cell size.
    """
    member = mask == label
    if not member.any():
        raise ValueError(f"label {label} not present in mask")
    return float(std_field.values[member].astype(np.float64).mean())


def frame_activities(
    stack: ImageStack,
    masks: LabelMaskStack,
    t: int,
    n_minus: int,
    n_plus: int,
) -> list[CellInstance]:
    """Instances of frame t with activities from the given std window."""
    if masks.shape != stack.shape or masks.count != stack.count:
        raise ValueError("image and mask stacks must have matching geometry")
    field = moving_std(stack, t, n_minus, n_plus)
    mask = masks.masks[t - 1]
    instances = extract_instances(mask, t)
    if not instances:
        return []
    ys, xs = np.nonzero(mask)
    member_labels = mask[ys, xs]
    labels, inverse = np.unique(member_labels, return_inverse=True)
    sums = np.bincount(inverse, weights=field.values[ys, xs].astype(np.float64))
    counts = np.bincount(inverse)
    activities = sums / counts
    # np.unique sorts, matching extract_instances' label order.
    return [
        replace(inst, activity=float(activities[i]))
        for i, inst in enumerate(instances)
    ]


def activity_frame(stack: ImageStack, masks: LabelMaskStack, t: int) -> list[CellInstance]:
    """Instances of frame t with tracking-path activities (window (0, 1)).

    At t = N the clamped window degenerates to the single last frame and all
    activities are exactly zero.
    """
    return frame_activities(stack, masks, t, *TRACKING_WINDOW)


def render_activity_map(instances: list[CellInstance], mask: np.ndarray) -> np.ndarray:
    """Paint each instance's mask with its activity value; background is 0."""
    out = np.zeros(mask.shape, dtype=np.float32)
    for inst in instances:
        if inst.activity is None:
            raise ValueError(f"instance {inst.label} has no activity")
        member = mask == inst.label
        if not member.any():
            raise ValueError(f"label {inst.label} not present in mask")
        out[member] = inst.activity
    return out
