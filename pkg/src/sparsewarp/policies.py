"""Sparse frame-selection policies and overlap diagnostics.

A policy picks an ordered subset of session frames. Temporal selection takes
every k-th frame; spatial selection greedily takes the next frame at least a
geodesic threshold away from the last pick; oracle selection greedily extends
each hop as far as warped-pixel overlap stays above a floor, so it adapts to
actual scene coverage instead of pose spacing alone.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .geometry import se3_geodesic
from .session import Session
from .warping import DEFAULT_AREA_PERCENTILE, overlap_ratio

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TemporalPolicy:
    """Every interval-th frame: indices {0, k, 2k, ...}."""

    interval: int

    def __post_init__(self) -> None:
        if self.interval < 1:
            raise ValueError(f"interval must be >= 1, got {self.interval}")


@dataclass(frozen=True)
class SpatialPolicy:
    """Greedy pose-space selection: next frame with geodesic >= threshold."""

    threshold: float
    rho: float = 1.0

    def __post_init__(self) -> None:
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")


@dataclass(frozen=True)
class OraclePolicy:
    """Greedy overlap-gated selection.

    From the last selected frame i, advance j while the warped overlap of
    frame i at pose j stays at or above min_overlap and select the last j that
    satisfied it (first-failure rule). If even the immediate neighbor fails,
    it is selected anyway so progress never stalls.
    """

    min_overlap: float
    depth_source: str = "gt"

    def __post_init__(self) -> None:
        if not 0.0 < self.min_overlap <= 1.0:
            raise ValueError(f"min_overlap must be in (0, 1], got {self.min_overlap}")


Policy = TemporalPolicy | SpatialPolicy | OraclePolicy


@dataclass(frozen=True)
class SelectionReport:
    """Selected frame positions (0-based within the session) plus overlap stats.

    consecutive_overlaps[j] is the warped overlap of selected frame j at the
    pose of selected frame j+1, computed with `depth_source`. min/mean are NaN
    when fewer than two frames were selected.
    """

    selected: tuple[int, ...]
    selection_ratio: float
    consecutive_overlaps: tuple[float, ...]
    min_overlap: float
    mean_overlap: float
    depth_source: str


def _resolve_source(session: Session, requested: str | None) -> str:
    if requested is not None:
        return requested
    sources = session.depth_sources
    if "gt" in sources:
        return "gt"
    if not sources:
        raise ValueError("session has no depth source shared by every frame")
    return sources[0]


def _pair_overlap(session: Session, i: int, j: int, source: str, area_percentile: float) -> float:
    return overlap_ratio(
        session.frames[i], source, session.frames[j].pose, session.intrinsics, area_percentile
    )


def _report(
    session: Session, selected: list[int], source: str, area_percentile: float
) -> SelectionReport:
    overlaps = tuple(
        _pair_overlap(session, a, b, source, area_percentile)
        for a, b in zip(selected, selected[1:])
    )
    return SelectionReport(
        selected=tuple(selected),
        selection_ratio=len(selected) / len(session.frames),
        consecutive_overlaps=overlaps,
        min_overlap=min(overlaps) if overlaps else float("nan"),
        mean_overlap=float(np.mean(overlaps)) if overlaps else float("nan"),
        depth_source=source,
    )


def select_frames(
    session: Session,
    policy: Policy,
    depth_source: str | None = None,
    area_percentile: float = DEFAULT_AREA_PERCENTILE,
) -> SelectionReport:
    """Run a selection policy over a session.

    Args:
        session: input session.
        policy: TemporalPolicy, SpatialPolicy or OraclePolicy.
        depth_source: source used for overlap reporting (and for the oracle's
            decisions when the policy itself does not name one); defaults to
            'gt' when present.
        area_percentile: warp discontinuity filter used for overlap numbers.

    Returns:
        SelectionReport. Frame 0 is always selected; selections are strictly
        increasing positions into session.frames.
    """
    n = len(session.frames)
    if isinstance(policy, TemporalPolicy):
        source = _resolve_source(session, depth_source)
        selected = list(range(0, n, policy.interval))
        return _report(session, selected, source, area_percentile)

    if isinstance(policy, SpatialPolicy):
        source = _resolve_source(session, depth_source)
        selected = [0]
        for j in range(1, n):
            d = se3_geodesic(
                session.frames[selected[-1]].pose, session.frames[j].pose, policy.rho
            )
            if d >= policy.threshold:
                selected.append(j)
        return _report(session, selected, source, area_percentile)

    if isinstance(policy, OraclePolicy):
        source = policy.depth_source if depth_source is None else depth_source
        selected = [0]
        i = 0
        while i < n - 1:
            j = i + 1
            if _pair_overlap(session, i, j, source, area_percentile) < policy.min_overlap:
                pick = j
            else:
                while j + 1 < n and (
                    _pair_overlap(session, i, j + 1, source, area_percentile)
                    >= policy.min_overlap
                ):
                    j += 1
                pick = j
            selected.append(pick)
            i = pick
        return _report(session, selected, source, area_percentile)

    raise TypeError(f"unknown policy type {type(policy).__name__}")


@dataclass(frozen=True)
class GapOverlap:
    gap: int
    mean: float
    min: float
    max: float
    n_pairs: int


def overlap_curve(
    session: Session,
    gaps: list[int],
    depth_source: str | None = None,
    max_pairs_per_gap: int = 200,
    seed: int = 42,
    area_percentile: float = DEFAULT_AREA_PERCENTILE,
) -> list[GapOverlap]:
    """Mean/min/max warped overlap as a function of frame gap.

    For each gap g the pairs (i, i+g) are sampled uniformly without
    replacement (at most max_pairs_per_gap, seeded) and overlap is computed by
    actually warping frame i to pose i+g. Gaps that do not fit in the session
    are skipped with a warning.
    """
    if max_pairs_per_gap < 1:
        raise ValueError("max_pairs_per_gap must be >= 1")
    source = _resolve_source(session, depth_source)
    n = len(session.frames)
    rows = []
    for gap in gaps:
        if gap < 1 or gap >= n:
            logger.warning("overlap_curve: gap %d does not fit a %d-frame session, skipped", gap, n)
            continue
        starts = np.arange(0, n - gap)
        if starts.size > max_pairs_per_gap:
            rng = np.random.default_rng([seed, gap])
            starts = np.sort(rng.choice(starts, size=max_pairs_per_gap, replace=False))
        vals = [_pair_overlap(session, int(i), int(i + gap), source, area_percentile) for i in starts]
        rows.append(
            GapOverlap(
                gap=gap,
                mean=float(np.mean(vals)),
                min=float(np.min(vals)),
                max=float(np.max(vals)),
                n_pairs=len(vals),
            )
        )
    return rows


@dataclass(frozen=True)
class ThresholdPoint:
    threshold: float
    selection_ratio: float
    n_selected: int
    mean_consecutive_overlap: float


def geodesic_curve(
    session: Session,
    thresholds: list[float],
    rho: float = 1.0,
    depth_source: str | None = None,
    area_percentile: float = DEFAULT_AREA_PERCENTILE,
) -> list[ThresholdPoint]:
    """Selection ratio and overlap of the spatial policy across thresholds.

    Thresholds must be positive and strictly ascending.
    """
    if not thresholds:
        raise ValueError("thresholds must be nonempty")
    if any(t <= 0 for t in thresholds) or any(
        b <= a for a, b in zip(thresholds, thresholds[1:])
    ):
        raise ValueError(f"thresholds must be positive and strictly ascending, got {thresholds}")
    points = []
    for t in thresholds:
        report = select_frames(
            session, SpatialPolicy(threshold=t, rho=rho), depth_source, area_percentile
        )
        points.append(
            ThresholdPoint(
                threshold=t,
                selection_ratio=report.selection_ratio,
                n_selected=len(report.selected),
                mean_consecutive_overlap=report.mean_overlap,
            )
        )
    return points
