"""Minimum-area enclosing ellipse of a planar point set.

Khachiyan's barycentric-coordinate ascent on the lifted dual: keep a
weight per point, repeatedly shift weight onto the point farthest from
the current ellipsoid estimate, and stop once the largest lifted
Mahalanobis distance drops below ``(1 + epsilon) * (d + 1)``. The
returned ellipse covers every input point to within the relative
tolerance and its area is within ``(1 + epsilon)^2`` of optimal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import GeneralEllipse, general_to_standard, StandardEllipse

_DIM = 2


class TooFewPoints(ValueError):
    """Fewer than three distinct points; no nondegenerate ellipse exists."""


@dataclass(frozen=True)
class MveeConfig:
    epsilon: float = 0.05        # relative optimality tolerance
    max_iters: int | None = None  # None -> 10x the number of distinct points
    regularization: float = 1e-8  # scatter ridge, relative to squared spread
    fallback_radius: float = 0.05  # disk radius (m) for 1- and 2-point inputs

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.regularization < 0:
            raise ValueError("regularization must be nonnegative")


@dataclass(frozen=True, eq=False)
class MveeResult:
    """Fit output plus the dual weights and convergence flags."""

    ellipse: GeneralEllipse
    weights: np.ndarray   # dual weight per fitted (distinct) point
    points: np.ndarray    # the distinct points actually fitted
    iterations: int
    converged: bool
    degenerate: bool

    @property
    def standard(self) -> StandardEllipse:
        return general_to_standard(self.ellipse)


def dedupe_points(points, tol: float = 1e-12) -> np.ndarray:
    """Distinct points under coordinate rounding at ``tol``, sorted.

    Sorting makes the fit invariant to input permutation; duplicates
    would otherwise stall the weight update.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return pts
    decimals = max(0, int(round(-np.log10(tol))))
    keys = np.round(pts, decimals)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return pts[idx]  # ordered by sorted key, so permutation invariant


def khachiyan_mvee(points, cfg: MveeConfig = MveeConfig()) -> MveeResult:
    """Fit the minimum-area enclosing ellipse of at least 3 distinct points.

    Raises TooFewPoints when fewer than three distinct points remain
    after deduplication; callers needing a total function should use
    :func:`enclosing_ellipse`, which falls back to a covering disk.
    """
    pts = dedupe_points(points)
    n = len(pts)
    if n < 3:
        raise TooFewPoints(f"need >= 3 distinct points, got {n}")

    spread = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]))
    delta = cfg.regularization * spread ** 2
    sv = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
    degenerate = bool(sv[-1] ** 2 <= 1e-9 * max(sv[0] ** 2, np.finfo(float).tiny))

    q = np.column_stack([pts, np.ones(n)]).T  # lifted points, 3 x n
    u = np.full(n, 1.0 / n)
    ridge = np.diag([delta, delta, 0.0])
    target = (1.0 + cfg.epsilon) * (_DIM + 1)
    max_iters = cfg.max_iters if cfg.max_iters is not None else 10 * n

    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        x = (q * u) @ q.T + ridge
        m = np.einsum("in,in->n", q, np.linalg.solve(x, q))
        j = int(np.argmax(m))
        kappa = m[j]
        if kappa <= target:
            converged = True
            break
        step = (kappa - _DIM - 1.0) / ((_DIM + 1.0) * (kappa - 1.0))
        u *= 1.0 - step
        u[j] += step

    center = pts.T @ u
    sigma = pts.T @ (pts * u[:, None]) - np.outer(center, center)
    sigma += delta * np.eye(2)
    shape = np.linalg.inv(sigma) / _DIM

    # Guarantee coverage at the epsilon band even if the iteration cap hit.
    diffs = pts - center
    vals = np.einsum("ni,ij,nj->n", diffs, shape, diffs)
    worst = vals.max()
    band = (1.0 + cfg.epsilon) ** 2
    if worst > band:
        shape *= band / worst

    a = _sqrt_spd(shape)
    return MveeResult(
        ellipse=GeneralEllipse(a, -a @ center),
        weights=u,
        points=pts,
        iterations=it,
        converged=converged,
        degenerate=degenerate,
    )


def enclosing_ellipse(points, cfg: MveeConfig = MveeConfig()) -> MveeResult:
    """Total variant: 1- and 2-point inputs yield a covering disk.

    The disk is centered at the centroid with radius at least
    ``cfg.fallback_radius`` and large enough to cover both points, so
    downstream coverage guarantees hold for every cluster size.
    """
    pts = dedupe_points(points)
    if len(pts) >= 3:
        return khachiyan_mvee(pts, cfg)
    if len(pts) == 0:
        raise TooFewPoints("no points")
    center = pts.mean(axis=0)
    reach = float(np.linalg.norm(pts - center, axis=1).max())
    radius = max(cfg.fallback_radius, reach * (1.0 + 1e-9))
    a = np.eye(2) / radius
    return MveeResult(
        ellipse=GeneralEllipse(a, -a @ center),
        weights=np.full(len(pts), 1.0 / len(pts)),
        points=pts,
        iterations=0,
        converged=True,
        degenerate=len(pts) < 3,
    )


def _sqrt_spd(m: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(m)
    return evecs @ np.diag(np.sqrt(np.maximum(evals, 0.0))) @ evecs.T
