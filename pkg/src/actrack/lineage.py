"""Stitch per-frame-pair assignments into an acyclic lineage graph."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import FramePairAssignment
from .model import CellInstance, LabelMaskStack

__all__ = ["TrackRecord", "LineageGraph", "accumulate", "relabel_masks"]


@dataclass
class TrackRecord:
    """One maximal cell track: a chain of instances between birth and end.

    ``parent_id`` is 0 for tracks that start by appearance; a positive value
    names the mother track, whose last frame is this track's begin - 1.
    ``member_cells`` holds one (frame_index, mask_label) pair per frame.
    """

    track_id: int
    begin_frame: int
    end_frame: int
    parent_id: int
    member_cells: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class LineageGraph:
    """Acyclic oriented graph of tracks with parent links."""

    tracks: list[TrackRecord]
    frame_count: int

    def validate(self) -> None:
        """Check structural invariants; raises ValueError on breach."""
        by_id = {t.track_id: t for t in self.tracks}
        if len(by_id) != len(self.tracks):
            raise ValueError("duplicate track ids")
        for track in self.tracks:
            if track.begin_frame > track.end_frame:
                raise ValueError(f"track {track.track_id}: begin > end")
            if not (1 <= track.begin_frame and track.end_frame <= self.frame_count):
                raise ValueError(f"track {track.track_id}: frames outside stack")
            frames = [f for f, _ in track.member_cells]
            if frames != list(range(track.begin_frame, track.end_frame + 1)):
                raise ValueError(f"track {track.track_id}: member frames not contiguous")
            if track.parent_id == track.track_id:
                raise ValueError(f"track {track.track_id}: is its own parent")
            if track.parent_id:
                parent = by_id.get(track.parent_id)
                if parent is None:
                    raise ValueError(f"track {track.track_id}: unknown parent {track.parent_id}")
                if parent.end_frame != track.begin_frame - 1:
                    raise ValueError(
                        f"track {track.track_id}: parent {parent.track_id} ends at "
                        f"{parent.end_frame}, expected {track.begin_frame - 1}"
                    )
        # Parent ids always point at strictly earlier tracks in frame time,
        # so the checks above already exclude cycles; verify reachability
        # terminates anyway to guard against pathological inputs.
        for track in self.tracks:
            seen = set()
            cur = track
            while cur.parent_id:
                if cur.track_id in seen:
                    raise ValueError("parent links form a cycle")
                seen.add(cur.track_id)
                cur = by_id[cur.parent_id]

    def labels_by_frame(self) -> list[dict[int, int]]:
        """Per-frame mapping mask_label -> track_id."""
        out: list[dict[int, int]] = [dict() for _ in range(self.frame_count)]
        for track in self.tracks:
            for frame, label in track.member_cells:
                mapping = out[frame - 1]
                if label in mapping:
                    raise ValueError(
                        f"frame {frame}: label {label} claimed by tracks "
                        f"{mapping[label]} and {track.track_id}"
                    )
                mapping[label] = track.track_id
        return out


def accumulate(
    assignments: list[FramePairAssignment],
    instances_per_frame: list[list[CellInstance]],
) -> LineageGraph:
    """Fold frame-pair assignments into tracks.

    Growth links extend the mother's track; division links close it and open
    one child per daughter; appeared labels open parentless tracks. Track
    ids follow first-appearance order starting at 1 (label-ascending within
    a frame).
    """
    n_frames = len(instances_per_frame)
    if len(assignments) != n_frames - 1:
        raise ValueError(
            f"{len(assignments)} assignments for {n_frames} frames; expected {n_frames - 1}"
        )
    tracks: list[TrackRecord] = []
    next_id = 1
    active: dict[int, TrackRecord] = {}

    def open_track(frame: int, label: int, parent_id: int) -> None:
        nonlocal next_id
        track = TrackRecord(
            track_id=next_id,
            begin_frame=frame,
            end_frame=frame,
            parent_id=parent_id,
            member_cells=[(frame, label)],
        )
        next_id += 1
        tracks.append(track)
        active[label] = track

    for inst in sorted(instances_per_frame[0], key=lambda c: c.label):
        open_track(1, inst.label, 0)

    for t, asg in enumerate(assignments, start=1):
        daughters_seen: set[int] = set()
        next_active: dict[int, TrackRecord] = {}
        openings: list[tuple[int, int]] = []  # (daughter label, parent track id)

        def claim_daughter(label: int) -> None:
            if label in daughters_seen:
                raise ValueError(f"frame {t + 1}: daughter {label} referenced twice")
            daughters_seen.add(label)

        def close_mother(label: int) -> TrackRecord:
            try:
                return active.pop(label)
            except KeyError:
                raise ValueError(f"frame {t}: unknown mother label {label}") from None

        for mother_label, daughter_label in asg.growth_links:
            claim_daughter(daughter_label)
            track = close_mother(mother_label)
            track.end_frame = t + 1
            track.member_cells.append((t + 1, daughter_label))
            next_active[daughter_label] = track
        for link in asg.division_links:
            mother_track = close_mother(link[0])
            for daughter_label in link[1:]:
                claim_daughter(daughter_label)
                openings.append((daughter_label, mother_track.track_id))
        for daughter_label in asg.appeared:
            claim_daughter(daughter_label)
            openings.append((daughter_label, 0))
        for mother_label in asg.disappeared:
            close_mother(mother_label)
        if active:
            raise ValueError(
                f"frame {t}: labels {sorted(active)} not referenced by the assignment"
            )
        active = next_active
        for label, parent_id in sorted(openings):
            open_track(t + 1, label, parent_id)

        expected = {inst.label for inst in instances_per_frame[t]}
        if daughters_seen != expected:
            raise ValueError(
                f"frame {t + 1}: assignment covers {sorted(daughters_seen)}, "
                f"instances are {sorted(expected)}"
            )

    graph = LineageGraph(tracks=tracks, frame_count=n_frames)
    graph.validate()
    return graph


def relabel_masks(graph: LineageGraph, masks: LabelMaskStack) -> LabelMaskStack:
    """Rewrite every member cell's pixels to its track id.

    Rejects instances present in the masks but covered by no track.
    """
    if masks.count != graph.frame_count:
        raise ValueError(
            f"mask stack has {masks.count} frames, graph covers {graph.frame_count}"
        )
    mappings = graph.labels_by_frame()
    out = []
    for index, mask in enumerate(masks.masks):
        mapping = mappings[index]
        present = np.unique(mask[mask > 0])
        uncovered = [int(l) for l in present if int(l) not in mapping]
        if uncovered:
            raise ValueError(f"frame {index + 1}: labels {uncovered} not covered by any track")
        relabeled = np.zeros(mask.shape, dtype=np.int32)
        for label, track_id in mapping.items():
            relabeled[mask == label] = track_id
        out.append(relabeled)
    return LabelMaskStack(out)
