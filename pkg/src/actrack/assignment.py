"""Two-stage frame-pair assignment.

Stage 1 walks the frame-t cells in ascending activity order and greedily
commits each to its best in-range successor, provided the successor did not
shrink. Whatever remains (mostly dividing cells and their daughters) enters
stage 2: a rectangular linear assignment on a row-doubled cost matrix, so
each remaining mother can win up to two daughters.
"""
from __future__ import annotations

import functools
import itertools
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .linking import LinkConfig, candidates_for, gaussian_value, passes_cutoff, sigma_of
from .model import CellInstance

__all__ = [
    "CostMatrix",
    "FramePairAssignment",
    "stage1_greedy",
    "build_cost_matrix",
    "lap_solve",
    "brute_force_lap",
    "assign_frame_pair",
]

# Replaces forbidden (below-cutoff) entries during solving; strictly larger
# than any achievable sum of real entries, which lie in [-1, 0].
_FORBIDDEN_SENTINEL = 1.0e6

# brute_force_lap guards: contract limit on the short dimension, plus a cap
# on the enumeration size for very lopsided shapes.
_BRUTE_FORCE_MAX_DIM = 9
_BRUTE_FORCE_MAX_MAPS = 2_000_000


@functools.lru_cache(maxsize=128)
def _permutation_array(n: int, k: int) -> np.ndarray:
    """All k-permutations of range(n), one per row, cached across calls."""
    return np.array(list(itertools.permutations(range(n), k)), dtype=np.intp)


@dataclass
class CostMatrix:
    """Row-doubled loss matrix for stage 2.

    Rows i and i + m refer to the same mother, so a mother matched by both
    of its rows receives two daughters. ``forbidden`` marks pairs whose
    Gaussian value fell below the cutoff; their entries still hold the raw
    loss but must never produce a reported link.
    """

    entries: np.ndarray
    forbidden: np.ndarray

    def __post_init__(self):
        if self.entries.shape != self.forbidden.shape:
            raise ValueError("entries and forbidden must have the same shape")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass
class FramePairAssignment:
    """Classified links between the cells of frame t and frame t+1."""

    growth_links: list[tuple[int, int]] = field(default_factory=list)
    division_links: list[tuple[int, ...]] = field(default_factory=list)
    appeared: list[int] = field(default_factory=list)
    disappeared: list[int] = field(default_factory=list)


def stage1_greedy(
    mothers: list[CellInstance],
    daughters: list[CellInstance],
    config: LinkConfig,
) -> tuple[list[tuple[int, int]], list[CellInstance], list[CellInstance]]:
    """Activity-prioritized single assignment of growing cells.

    Mothers are visited in ascending activity order (ties by label). Each
    takes its minimal-loss retained candidate among the still-unassigned
    daughters, but only commits if the daughter did not shrink below the
    mother's area; otherwise the mother is deferred to stage 2, as are
    mothers with no retained candidate.
    """
    for mother in mothers:
        if mother.activity is None:
            raise ValueError(f"mother {mother.label} has no activity")
    order = sorted(mothers, key=lambda c: (c.activity, c.label))
    by_label = {d.label: d for d in daughters}
    consumed: set[int] = set()
    growth: list[tuple[int, int]] = []
    remaining_mothers: list[CellInstance] = []
    for mother in order:
        pool = [d for d in daughters if d.label not in consumed]
        cands = candidates_for(mother, pool, config)
        if not cands:
            remaining_mothers.append(mother)
            continue
        best = by_label[cands[0].daughter_label]
        if best.area >= mother.area:
            growth.append((mother.label, best.label))
            consumed.add(best.label)
        else:
            remaining_mothers.append(mother)
    remaining_daughters = [d for d in daughters if d.label not in consumed]
    return growth, remaining_mothers, remaining_daughters


def build_cost_matrix(
    mothers: list[CellInstance],
    daughters: list[CellInstance],
    config: LinkConfig,
) -> CostMatrix:
    """Losses of all leftover mother/daughter pairs, rows stacked twice."""
    m, d = len(mothers), len(daughters)
    base = np.zeros((m, d), dtype=np.float64)
    base_forbidden = np.zeros((m, d), dtype=bool)
    for i, mother in enumerate(mothers):
        if mother.activity is None:
            raise ValueError(f"mother {mother.label} has no activity")
        sigma = sigma_of(mother.activity, config)
        for j, daughter in enumerate(daughters):
            g = gaussian_value(mother.centroid, sigma, daughter.centroid)
            base[i, j] = -g
            base_forbidden[i, j] = not passes_cutoff(g, config)
    entries = np.concatenate([base, base], axis=0)
    forbidden = np.concatenate([base_forbidden, base_forbidden], axis=0)
    return CostMatrix(entries=entries, forbidden=forbidden)


def lap_solve(C: CostMatrix) -> list[tuple[int, int]]:
    """Minimum-cost rectangular matching of size min(rows, cols).

    Forbidden entries are solved through a large finite sentinel; any
    returned pair landing on one is dropped, so an out-of-range forced match
    surfaces as a missing link rather than a bogus one.
    """
    if C.entries.size == 0 or min(C.rows, C.cols) == 0:
        return []
    real = C.entries[~C.forbidden]
    if real.size and not np.isfinite(real).all():
        raise ValueError("cost matrix has non-finite entries")
    work = np.where(C.forbidden, _FORBIDDEN_SENTINEL, C.entries)
    rows, cols = linear_sum_assignment(work)
    return [
        (int(r), int(c))
        for r, c in zip(rows, cols)
        if not C.forbidden[r, c]
    ]


def brute_force_lap(C: CostMatrix) -> list[tuple[int, int]]:
    """Exhaustive oracle for lap_solve.

    Enumerates every maximal injective row-to-column map, scores it with the
    same sentinel treatment of forbidden entries, and returns a minimum-cost
    map (ties resolved by lexicographically smallest pair list) with
    forbidden pairs dropped afterwards.
    """
    n_rows, n_cols = C.rows, C.cols
    k = min(n_rows, n_cols)
    if k == 0:
        return []
    if k > _BRUTE_FORCE_MAX_DIM:
        raise ValueError(f"refusing brute force with min dimension {k} > {_BRUTE_FORCE_MAX_DIM}")
    n_maps = 1
    for i in range(k):
        n_maps *= max(n_rows, n_cols) - i
    if n_maps > _BRUTE_FORCE_MAX_MAPS:
        raise ValueError(f"refusing brute force over {n_maps} maps")
    real = C.entries[~C.forbidden]
    if real.size and not np.isfinite(real).all():
        raise ValueError("cost matrix has non-finite entries")
    work = np.where(C.forbidden, _FORBIDDEN_SENTINEL, C.entries)

    if n_rows <= n_cols:
        maps = _permutation_array(n_cols, n_rows)
        totals = work[np.arange(n_rows)[None, :], maps].sum(axis=1)
    else:
        maps = _permutation_array(n_rows, n_cols)
        totals = work[maps, np.arange(n_cols)[None, :]].sum(axis=1)

    best = totals.min()
    candidates = np.flatnonzero(totals == best)
    best_pairs = None
    for idx in candidates:
        if n_rows <= n_cols:
            pairs = [(i, int(maps[idx, i])) for i in range(n_rows)]
        else:
            pairs = sorted((int(maps[idx, j]), j) for j in range(n_cols))
        if best_pairs is None or pairs < best_pairs:
            best_pairs = pairs
    assert best_pairs is not None
    return [(r, c) for r, c in best_pairs if not C.forbidden[r, c]]


def assign_frame_pair(
    mothers: list[CellInstance],
    daughters: list[CellInstance],
    config: LinkConfig,
) -> FramePairAssignment:
    """Run both assignment stages and classify every cell of the pair.

    Stage-2 matches become division links carrying one or two daughters;
    unmatched daughters appeared, unmatched mothers disappeared. No daughter
    is ever used twice.
    """
    growth, rem_mothers, rem_daughters = stage1_greedy(mothers, daughters, config)
    result = FramePairAssignment(growth_links=growth)

    m = len(rem_mothers)
    matched_daughters: set[int] = set()
    mother_wins: dict[int, list[int]] = defaultdict(list)
    if m and rem_daughters:
        C = build_cost_matrix(rem_mothers, rem_daughters, config)
        for row, col in lap_solve(C):
            mother = rem_mothers[row % m]
            daughter = rem_daughters[col]
            mother_wins[mother.label].append(daughter.label)
            matched_daughters.add(daughter.label)

    for mother in rem_mothers:
        wins = mother_wins.get(mother.label)
        if wins:
            result.division_links.append((mother.label, *sorted(wins)))
        else:
            result.disappeared.append(mother.label)
    result.division_links.sort(key=lambda link: link[0])
    result.disappeared.sort()
    result.appeared = sorted(
        d.label for d in rem_daughters if d.label not in matched_daughters
    )
    return result
