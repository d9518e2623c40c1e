"""Identification pipeline: cluster, fit an ellipse per cluster, merge.

The single entry point :func:`identify` chains the variational mixture
fit, a per-cluster enclosing-ellipse fit (with a disk fallback for
clusters too small to support one), and the merge refinement. Every
input point ends up inside some output ellipse within twice the fit
tolerance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .clustering import EmptyInput, VigmmConfig, fit_vigmm
from .geometry import StandardEllipse
from .mvee import MveeConfig, enclosing_ellipse
from .refinement import RefinementConfig, refine


@dataclass(frozen=True)
class PipelineConfig:
    vigmm: VigmmConfig = field(default_factory=VigmmConfig)
    mvee: MveeConfig = field(default_factory=MveeConfig)
    refine: RefinementConfig = field(default_factory=RefinementConfig)


@dataclass(frozen=True)
class StageTimings:
    cluster_ms: float
    mvee_ms: float
    refine_ms: float

    @property
    def total_ms(self) -> float:
        return self.cluster_ms + self.mvee_ms + self.refine_ms


def identify(points, cfg: PipelineConfig = PipelineConfig()
             ) -> tuple[list[StandardEllipse], StageTimings]:
    """Identify obstacle ellipses in one point cloud.

    Points are hard-assigned to their highest-responsibility cluster;
    each cluster gets its minimum-area enclosing ellipse and the merge
    pass then removes over-segmentation.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyInput("no points to identify")

    t0 = time.perf_counter()
    clusters = fit_vigmm(pts, cfg.vigmm)
    t1 = time.perf_counter()
    ellipses = []
    for k in range(len(clusters.components)):
        members = pts[clusters.assignments == k]
        if len(members) == 0:
            continue
        ellipses.append(enclosing_ellipse(members, cfg.mvee).standard)
    t2 = time.perf_counter()
    refined = refine(ellipses, cfg.refine)
    t3 = time.perf_counter()

    timings = StageTimings(
        cluster_ms=(t1 - t0) * 1e3,
        mvee_ms=(t2 - t1) * 1e3,
        refine_ms=(t3 - t2) * 1e3,
    )
    return refined, timings


def assign_points(points, ellipses: list[StandardEllipse]) -> np.ndarray:
    """Index of the best-fitting ellipse per point (smallest quadratic value)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not ellipses:
        raise ValueError("no ellipses to assign to")
    vals = np.empty((len(pts), len(ellipses)))
    for j, e in enumerate(ellipses):
        d = pts - e.xc
        vals[:, j] = np.einsum("ni,ij,nj->n", d, e.shape_matrix(), d)
    return vals.argmin(axis=1)
