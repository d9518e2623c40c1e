"""Ellipse forms, conversions, and geometric queries on the 2-D plane.

An ellipse appears in three interchangeable parameterizations:

* general form    ``{x : ||A x + b||_2 <= 1}`` with ``A`` symmetric
  positive-definite,
* quadratic form  ``{x : x'Ax + 2 b'x + c <= 0}``,
* standard form   center ``xc``, semi-axes ``r1 <= r2``, and the
  major-axis direction ``theta``.

The standard form is the canonical one used everywhere downstream:
``r1`` is the minor and ``r2`` the major semi-axis, and ``theta`` is the
angle of the major axis measured counter-clockwise from the x-axis,
reduced to ``[0, pi)``. Near-circular ellipses get ``theta = 0`` because
their orientation is unobservable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Centralized numeric tolerances for the geometric predicates.
BOUNDARY_BAND = 1e-9       # membership agreement band on the boundary
ROUND_TRIP_TOL = 1e-8      # parameter error allowed across form round trips
NEAR_CIRCULAR_RTOL = 1e-9  # r2/r1 - 1 below this counts as a circle


def rotation(theta: float) -> np.ndarray:
    """Counter-clockwise rotation matrix."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def wrap_half_turn(theta: float) -> float:
    """Reduce an axis angle to [0, pi); ellipse axes are unsigned."""
    return float(theta % np.pi)


def _vec2(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError("expected a finite 2-vector")
    return a


def _spd2(m, name: str) -> np.ndarray:
    a = np.asarray(m, dtype=float).reshape(2, 2)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    scale = max(np.abs(a).max(), 1.0)
    if abs(a[0, 1] - a[1, 0]) > 1e-9 * scale:
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(a).min() <= 0:
        raise ValueError(f"{name} must be positive definite")
    return 0.5 * (a + a.T)


@dataclass(frozen=True, eq=False)
class GeneralEllipse:
    """Norm-form ellipse ``{x : ||A x + b|| <= 1}``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _spd2(self.A, "A"))
        object.__setattr__(self, "b", _vec2(self.b))

    def center(self) -> np.ndarray:
        return -np.linalg.solve(self.A, self.b)


@dataclass(frozen=True, eq=False)
class QuadraticEllipse:
    """Quadratic-form ellipse ``{x : x'Ax + 2 b'x + c <= 0}``."""

    A: np.ndarray
    b: np.ndarray
    c: float

    def __post_init__(self):
        object.__setattr__(self, "A", _spd2(self.A, "A"))
        object.__setattr__(self, "b", _vec2(self.b))
        object.__setattr__(self, "c", float(self.c))
        if self.interior_size() <= 0:
            raise ValueError("quadratic form has empty interior")

    def interior_size(self) -> float:
        """b'A^-1 b - c; positive iff the ellipse has nonempty interior."""
        return float(self.b @ np.linalg.solve(self.A, self.b) - self.c)

    def center(self) -> np.ndarray:
        return -np.linalg.solve(self.A, self.b)


@dataclass(frozen=True, eq=False)
class StandardEllipse:
    """Center / semi-axes / major-axis-angle form, canonicalized."""

    xc: np.ndarray
    r1: float
    r2: float
    theta: float
    near_circular: bool = False

    def __post_init__(self):
        object.__setattr__(self, "xc", _vec2(self.xc))
        object.__setattr__(self, "r1", float(self.r1))
        object.__setattr__(self, "r2", float(self.r2))
        object.__setattr__(self, "theta", float(self.theta))
        if not (0 < self.r1 <= self.r2):
            raise ValueError(f"axes must satisfy 0 < r1 <= r2, got {self.r1}, {self.r2}")
        if not (0 <= self.theta < np.pi):
            raise ValueError(f"theta must lie in [0, pi), got {self.theta}")

    @classmethod
    def canonical(cls, xc, r1: float, r2: float, theta: float) -> "StandardEllipse":
        """Build with axis ordering, angle wrap, and circle convention applied."""
        r1, r2 = float(r1), float(r2)
        if r1 > r2:
            r1, r2 = r2, r1
            theta = theta + np.pi / 2.0
        theta = wrap_half_turn(theta)
        near = r2 / r1 - 1.0 < NEAR_CIRCULAR_RTOL
        if near:
            theta = 0.0
        return cls(xc, r1, r2, theta, near_circular=near)

    def shape_matrix(self) -> np.ndarray:
        """SPD matrix M with membership (x-xc)'M(x-xc) <= 1."""
        r = rotation(self.theta)
        return r @ np.diag([self.r2 ** -2, self.r1 ** -2]) @ r.T

    def major_axis_direction(self) -> np.ndarray:
        return np.array([np.cos(self.theta), np.sin(self.theta)])


@dataclass(frozen=True, eq=False)
class OrientedBox:
    """Rectangle at an arbitrary angle, parameterized by half extents."""

    center: np.ndarray
    half_extents: np.ndarray
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec2(self.center))
        object.__setattr__(self, "half_extents", _vec2(self.half_extents))
        object.__setattr__(self, "angle", float(self.angle))
        if np.any(self.half_extents <= 0):
            raise ValueError("half extents must be positive")

    def area(self) -> float:
        return float(4.0 * self.half_extents[0] * self.half_extents[1])

    def corners(self) -> np.ndarray:
        r = rotation(self.angle)
        signs = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)
        return self.center + (signs * self.half_extents) @ r.T

    def contains(self, points, atol: float = 0.0):
        """Componentwise box test in the box frame, slack ``atol``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        local = (pts - self.center) @ rotation(self.angle)
        ok = np.all(np.abs(local) <= self.half_extents + atol, axis=1)
        return ok if ok.size > 1 else bool(ok[0])


def general_to_quadratic(e: GeneralEllipse) -> QuadraticEllipse:
    """Expand ||Ax+b|| <= 1 into x'(A'A)x + 2(A'b)'x + (b'b - 1) <= 0."""
    return QuadraticEllipse(e.A.T @ e.A, e.A.T @ e.b, float(e.b @ e.b) - 1.0)


def quadratic_to_standard(e: QuadraticEllipse) -> StandardEllipse:
    """Recover center, semi-axes and major-axis angle from the quadratic form."""
    xc = e.center()
    k = e.interior_size()
    m = e.A / k
    evals, evecs = np.linalg.eigh(m)  # ascending; smallest eigenvalue = major axis
    r2 = 1.0 / np.sqrt(evals[0])
    r1 = 1.0 / np.sqrt(evals[1])
    major = evecs[:, 0]
    theta = np.arctan2(major[1], major[0])
    return StandardEllipse.canonical(xc, r1, r2, theta)


def standard_to_general(e: StandardEllipse) -> GeneralEllipse:
    r = rotation(e.theta)
    a = r @ np.diag([1.0 / e.r2, 1.0 / e.r1]) @ r.T
    return GeneralEllipse(a, -a @ e.xc)


def general_to_standard(e: GeneralEllipse) -> StandardEllipse:
    return quadratic_to_standard(general_to_quadratic(e))


def contains(e: StandardEllipse, p, inflate: float = 0.0):
    """Membership test with both semi-axes scaled by (1 + inflate).

    Accepts a single point (2,) or a stack (n, 2); returns bool or bool
    array accordingly.
    """
    if inflate < 0:
        raise ValueError("inflate must be nonnegative")
    pts = np.asarray(p, dtype=float)
    single = pts.ndim == 1
    d = np.atleast_2d(pts) - e.xc
    m = e.shape_matrix()
    val = np.einsum("ni,ij,nj->n", d, m, d)
    ok = val <= (1.0 + inflate) ** 2
    return bool(ok[0]) if single else ok


def area(e) -> float:
    """Ellipse area; pi*r1*r2 in standard form, pi/det(A) in general form."""
    if isinstance(e, StandardEllipse):
        return float(np.pi * e.r1 * e.r2)
    if isinstance(e, GeneralEllipse):
        return float(np.pi / np.linalg.det(e.A))
    if isinstance(e, QuadraticEllipse):
        return area(quadratic_to_standard(e))
    raise TypeError(f"unsupported ellipse type {type(e)!r}")


def boundary_sample(e: StandardEllipse, n: int) -> np.ndarray:
    """n points on the boundary at uniformly spaced parameter angles."""
    if n < 4:
        raise ValueError("need at least 4 boundary samples")
    phi = 2.0 * np.pi * np.arange(n) / n
    body = np.column_stack([e.r2 * np.cos(phi), e.r1 * np.sin(phi)])
    return e.xc + body @ rotation(e.theta).T


def obb_of_pair(e1: StandardEllipse, e2: StandardEllipse,
                samples_per_ellipse: int = 64) -> OrientedBox:
    """Oriented bounding box of two ellipses.

    The box angle comes from the principal component of the pooled
    boundary samples; the extents are then fit exactly around the
    samples, so every sample is contained by construction.
    """
    pts = np.vstack([boundary_sample(e1, samples_per_ellipse),
                     boundary_sample(e2, samples_per_ellipse)])
    pts = pts[np.lexsort(pts.T)]  # order-independent: box symmetric in (e1, e2)
    mu = pts.mean(axis=0)
    centered = pts - mu
    cov = centered.T @ centered / len(pts)
    _, evecs = np.linalg.eigh(cov)
    axis = evecs[:, -1]
    angle = wrap_half_turn(np.arctan2(axis[1], axis[0]))
    r = rotation(angle)
    local = centered @ r
    lo = local.min(axis=0)
    hi = local.max(axis=0)
    center = mu + r @ ((lo + hi) / 2.0)
    half = np.maximum((hi - lo) / 2.0, 1e-12)
    return OrientedBox(center, half, angle)
