"""Activity-scaled Gaussian linking measure and candidate pruning.

Each frame-t cell defines an unnormalized 2-D Gaussian centered at its
centroid whose width grows with the cell's activity; frame-t+1 cells are
link candidates wherever that Gaussian is still above a fixed cutoff. The
linking loss is the negated Gaussian value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import CellInstance

__all__ = [
    "LinkConfig",
    "LinkCandidate",
    "sigma_of",
    "gaussian_value",
    "passes_cutoff",
    "candidates_for",
    "cutoff_radius",
]

# Relative slack on the cutoff comparison. The retention boundary is meant
# to sit exactly at distance sigma*sqrt(2*ln(1/cutoff)); without slack,
# last-ulp rounding in the Gaussian evaluation makes boundary candidates
# flip either way.
_CUTOFF_SLACK = 1e-9


@dataclass(frozen=True)
class LinkConfig:
    """Linking parameters: Gaussian scaling, cutoff, and width floor."""

    k: float = 2.5
    g_cutoff: float = 0.01
    sigma_floor: float = 0.5

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be > 0")
        if not 0.0 < self.g_cutoff < 1.0:
            raise ValueError("g_cutoff must lie in (0, 1)")
        if self.sigma_floor <= 0:
            raise ValueError("sigma_floor must be > 0")


@dataclass(frozen=True)
class LinkCandidate:
    """A retained mother -> daughter link hypothesis; loss == -g_value."""

    mother_label: int
    daughter_label: int
    g_value: float
    loss: float


def sigma_of(activity: float, config: LinkConfig) -> float:
    """Gaussian width for a cell: activity / k, floored.

    The floor keeps zero-activity cells matchable to their own unmoved
    successors (the Gaussian degenerates to a spike as activity -> 0).
    """
    if activity < 0:
        raise ValueError("activity must be >= 0")
    return max(activity / config.k, config.sigma_floor)


def gaussian_value(center: tuple[float, float], sigma: float, point: tuple[float, float]) -> float:
    """Unnormalized 2-D Gaussian (peak value 1) evaluated at point."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    dx = point[0] - center[0]
    dy = point[1] - center[1]
    return math.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))


def passes_cutoff(g_value: float, config: LinkConfig) -> bool:
    """Inclusive cutoff test: values at the exact boundary are retained."""
    return g_value >= config.g_cutoff * (1.0 - _CUTOFF_SLACK)


def cutoff_radius(sigma: float, config: LinkConfig) -> float:
    """Distance at which the Gaussian reaches the cutoff value."""
    return sigma * math.sqrt(2.0 * math.log(1.0 / config.g_cutoff))


def candidates_for(
    mother: CellInstance,
    daughters: list[CellInstance],
    config: LinkConfig,
) -> list[LinkCandidate]:
    """Evaluate the mother's Gaussian at every daughter centroid.

    Retains daughters at or above the cutoff, best (lowest loss) first;
    ties broken by ascending daughter label for deterministic runs.
    """
    if mother.activity is None:
        raise ValueError(f"mother {mother.label} has no activity")
    sigma = sigma_of(mother.activity, config)
    retained = []
    for daughter in daughters:
        g = gaussian_value(mother.centroid, sigma, daughter.centroid)
        if passes_cutoff(g, config):
            retained.append(
                LinkCandidate(
                    mother_label=mother.label,
                    daughter_label=daughter.label,
                    g_value=g,
                    loss=-g,
                )
            )
    retained.sort(key=lambda c: (c.loss, c.daughter_label))
    return retained
