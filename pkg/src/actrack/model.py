"""Shared domain types and per-frame instance extraction from label masks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ImageStack",
    "LabelMaskStack",
    "CellInstance",
    "extract_instances",
    "filter_min_area",
    "apply_min_area",
]


@dataclass
class ImageStack:
    """Ordered sequence of 2-D intensity frames with identical dimensions.

    ``frame_interval`` is acquisition metadata (minutes per frame) and does
    not influence any computation. ``intensity_range`` records the original
    (lo, hi) intensity bounds when the stack has been min-max normalized.
    """

    frames: list[np.ndarray]
    frame_interval: float = 1.0
    intensity_range: tuple[float, float] | None = None

    def __post_init__(self):
        if len(self.frames) < 1:
            raise ValueError("an image stack needs at least one frame")
        shape = self.frames[0].shape
        for i, frame in enumerate(self.frames):
            if frame.ndim != 2:
                raise ValueError(f"frame {i} is not 2-D (shape {frame.shape})")
            if frame.shape != shape:
                raise ValueError(
                    f"frame {i} has shape {frame.shape}, expected {shape}"
                )

    @property
    def count(self) -> int:
        return len(self.frames)

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames[0].shape


@dataclass
class LabelMaskStack:
    """Per-frame integer label images; label > 0 marks one cell instance."""

    masks: list[np.ndarray]

    def __post_init__(self):
        if len(self.masks) < 1:
            raise ValueError("a mask stack needs at least one frame")
        shape = self.masks[0].shape
        for i, mask in enumerate(self.masks):
            if mask.ndim != 2 or mask.shape != shape:
                raise ValueError(
                    f"mask {i} has shape {mask.shape}, expected {shape}"
                )
            if not np.issubdtype(mask.dtype, np.integer):
                raise ValueError(f"mask {i} is not integer-typed ({mask.dtype})")
            if mask.min(initial=0) < 0:
                raise ValueError(f"mask {i} contains negative labels")

    @property
    def count(self) -> int:
        return len(self.masks)

    @property
    def shape(self) -> tuple[int, int]:
        return self.masks[0].shape


@dataclass(frozen=True)
class CellInstance:
    """One segmented cell in one frame.

    ``centroid`` is the uniform (binary-mask) center of mass in (x, y) pixel
    coordinates with x = column. ``activity`` is None until assigned.
    """

    frame_index: int
    label: int
    centroid: tuple[float, float]
    area: int
    activity: float | None = field(default=None)


def extract_instances(mask: np.ndarray, frame_index: int) -> list[CellInstance]:
    """Extract one CellInstance per distinct nonzero label, sorted by label.

    Centroids are arithmetic means of member pixel coordinates; labels are
    trusted as instance identifiers (no connected-component re-analysis).
    An all-zero mask yields an empty list.
    """
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return []
    member_labels = np.asarray(mask)[ys, xs]
    labels, inverse = np.unique(member_labels, return_inverse=True)
    areas = np.bincount(inverse)
    sum_x = np.bincount(inverse, weights=xs)
    sum_y = np.bincount(inverse, weights=ys)
    return [
        CellInstance(
            frame_index=frame_index,
            label=int(label),
            centroid=(float(sum_x[i] / areas[i]), float(sum_y[i] / areas[i])),
            area=int(areas[i]),
        )
        for i, label in enumerate(labels)
    ]


def filter_min_area(instances: list[CellInstance], min_area: int) -> list[CellInstance]:
    """Retain instances with area >= min_area, preserving order."""
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    return [inst for inst in instances if inst.area >= min_area]


def apply_min_area(masks: LabelMaskStack, min_area: int) -> LabelMaskStack:
    """Zero out all instances smaller than min_area from every mask frame.

    Undersized instances are removed as spurious detections; the returned
    stack is a copy, the input is left untouched.
    """
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    if min_area == 0:
        return LabelMaskStack([mask.copy() for mask in masks.masks])
    cleaned = []
    for mask in masks.masks:
        labels, counts = np.unique(mask[mask > 0], return_counts=True)
        small = labels[counts < min_area]
        out = mask.copy()
        if small.size:
            out[np.isin(out, small)] = 0
        cleaned.append(out)
    return LabelMaskStack(cleaned)
