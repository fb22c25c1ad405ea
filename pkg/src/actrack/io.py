"""Dataset reading and writing in the cell-tracking-challenge layout.

Frames live in an images directory as ``t{NNN}`` single-channel files, label
masks as ``mask{NNN}`` or ``man_track{NNN}``, and the lineage as a text
track file with one ``L B E P`` line per track. Frames are 1-based inside
the package and 0-based on disk; the conversion is confined to this module.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .activity import normalize_stack
from .lineage import LineageGraph, TrackRecord
from .model import ImageStack, LabelMaskStack

__all__ = [
    "DatasetLayout",
    "read_dataset",
    "read_image_dir",
    "write_image",
    "write_image_dir",
    "write_track_file",
    "parse_track_file",
    "write_activity_csv",
    "write_run_meta",
    "find_track_file",
]

_IMAGE_SUFFIXES = (".tif", ".tiff", ".png")
MASK_PREFIXES = ("man_track", "mask")
TRACK_FILE_NAMES = ("man_track.txt", "res_track.txt")


@dataclass(frozen=True)
class DatasetLayout:
    """File locations for one dataset: frames, masks, optional track file."""

    images_dir: Path
    masks_dir: Path
    track_file: Path | None = None


def _index_files(directory: Path, prefixes: tuple[str, ...]) -> list[Path]:
    """Files named <prefix><digits>.<ext>, validated contiguous from 0."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    found: dict[int, Path] = {}
    pattern = re.compile(
        r"^(?:" + "|".join(re.escape(p) for p in prefixes) + r")(\d+)$"
    )
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() not in _IMAGE_SUFFIXES:
            continue
        match = pattern.match(path.stem)
        if not match:
            continue
        index = int(match.group(1))
        if index in found:
            raise ValueError(f"duplicate frame index {index} in {directory}")
        found[index] = path
    if not found:
        raise ValueError(f"no {'/'.join(prefixes)}* frames found in {directory}")
    count = max(found) + 1
    missing = [i for i in range(count) if i not in found]
    if missing:
        name = f"{prefixes[0]}{missing[0]:03d}"
        raise ValueError(f"missing frame {name} in {directory}")
    return [found[i] for i in range(count)]


def _read_image(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"{path}: expected a single-channel image, got shape {arr.shape}")
    return arr


def read_image_dir(directory: Path, prefixes: tuple[str, ...]) -> list[np.ndarray]:
    """Read an indexed image sequence, enforcing consistent dimensions."""
    arrays = [_read_image(p) for p in _index_files(Path(directory), prefixes)]
    shape = arrays[0].shape
    for i, arr in enumerate(arrays):
        if arr.shape != shape:
            raise ValueError(
                f"frame {i} in {directory} has shape {arr.shape}, expected {shape}"
            )
    return arrays


def read_dataset(
    layout: DatasetLayout, frame_interval: float = 1.0
) -> tuple[ImageStack, LabelMaskStack]:
    """Read frames and masks; intensities are min-max normalized to [0, 255].

    The original intensity bounds are recorded on the returned stack.
    """
    frames = read_image_dir(layout.images_dir, ("t",))
    mask_arrays = read_image_dir(layout.masks_dir, MASK_PREFIXES)
    if len(frames) != len(mask_arrays):
        raise ValueError(
            f"{len(frames)} frames but {len(mask_arrays)} masks "
            f"({layout.images_dir} vs {layout.masks_dir})"
        )
    if frames[0].shape != mask_arrays[0].shape:
        raise ValueError(
            f"frame shape {frames[0].shape} != mask shape {mask_arrays[0].shape}"
        )
    raw = ImageStack(
        [f.astype(np.float32) for f in frames], frame_interval=frame_interval
    )
    stack, _ = normalize_stack(raw)
    masks = LabelMaskStack([m.astype(np.int32) for m in mask_arrays])
    return stack, masks


def write_image(path: Path, array: np.ndarray) -> None:
    """Write one single-channel image; dtype picks the pixel format."""
    path = Path(path)
    if array.dtype == np.uint8:
        img = Image.fromarray(array)
    elif array.dtype == np.uint16:
        img = Image.fromarray(array)
    elif array.dtype == np.float32:
        img = Image.fromarray(array, mode="F")
        if path.suffix.lower() not in (".tif", ".tiff"):
            raise ValueError("float images must be written as TIFF")
    else:
        raise ValueError(f"unsupported dtype {array.dtype}")
    img.save(path)


def _frame_name(prefix: str, index: int, count: int, suffix: str) -> str:
    width = max(3, len(str(count - 1)))
    return f"{prefix}{index:0{width}d}{suffix}"


def write_image_dir(
    directory: Path,
    arrays: list[np.ndarray],
    prefix: str,
    suffix: str = ".tif",
) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, arr in enumerate(arrays):
        path = directory / _frame_name(prefix, i, len(arrays), suffix)
        write_image(path, arr)
        paths.append(path)
    return paths


def mask_to_uint16(mask: np.ndarray) -> np.ndarray:
    if mask.max(initial=0) > np.iinfo(np.uint16).max:
        raise ValueError("label exceeds 16-bit range")
    return mask.astype(np.uint16)


def write_track_file(graph: LineageGraph, path: Path) -> None:
    """One ``L B E P`` line per track, ascending L, frames 0-based on disk."""
    lines = []
    for track in sorted(graph.tracks, key=lambda t: t.track_id):
        lines.append(
            f"{track.track_id} {track.begin_frame - 1} {track.end_frame - 1} {track.parent_id}"
        )
    Path(path).write_text("".join(line + "\n" for line in lines))


def parse_track_file(path: Path, frame_count: int | None = None) -> LineageGraph:
    """Rebuild a lineage graph from a track file.

    Member cells are reconstructed as (frame, track_id) per frame of each
    track's span, matching masks whose labels are track ids. When
    frame_count is omitted, the largest end frame is used.
    """
    tracks = []
    text = Path(path).read_text()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}:{line_no}: expected 'L B E P', got {line!r}")
        label, begin, end, parent = (int(p) for p in parts)
        tracks.append(
            TrackRecord(
                track_id=label,
                begin_frame=begin + 1,
                end_frame=end + 1,
                parent_id=parent,
                member_cells=[(f, label) for f in range(begin + 1, end + 2)],
            )
        )
    if frame_count is None:
        frame_count = max((t.end_frame for t in tracks), default=0)
    graph = LineageGraph(tracks=tracks, frame_count=frame_count)
    graph.validate()
    return graph


def find_track_file(directory: Path) -> Path:
    directory = Path(directory)
    for name in TRACK_FILE_NAMES:
        candidate = directory / name
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(
        f"no track file ({' or '.join(TRACK_FILE_NAMES)}) in {directory}"
    )


def write_activity_csv(path: Path, instances_per_frame) -> None:
    """CSV rows frame,label,activity; frame indices 0-based as on disk."""
    lines = ["frame,label,activity"]
    for instances in instances_per_frame:
        for inst in instances:
            if inst.activity is None:
                raise ValueError(f"instance {inst.label} has no activity")
            lines.append(f"{inst.frame_index - 1},{inst.label},{inst.activity:.6f}")
    Path(path).write_text("".join(line + "\n" for line in lines))


def write_run_meta(path: Path, meta: dict) -> None:
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
