import numpy as np
import pytest

from conftest import random_ellipse, shoelace_area
from ellid.geometry import (BOUNDARY_BAND, ROUND_TRIP_TOL, GeneralEllipse,
                            QuadraticEllipse, StandardEllipse, area,
                            boundary_sample, contains, general_to_quadratic,
                            general_to_standard, obb_of_pair,
                            quadratic_to_standard, standard_to_general)


def angle_diff_mod_pi(a, b):
    d = abs(a - b) % np.pi
    return min(d, np.pi - d)


def random_general(rng) -> GeneralEllipse:
    m = rng.normal(size=(2, 2))
    a = m.T @ m + 0.3 * np.eye(2)
    return GeneralEllipse(a, rng.uniform(-2, 2, size=2))


class TestGeneralToQuadratic:
    def test_unit_disk(self):
        q = general_to_quadratic(GeneralEllipse(np.eye(2), np.zeros(2)))
        assert np.allclose(q.A, np.eye(2))
        assert np.allclose(q.b, 0)
        assert q.c == pytest.approx(-1.0)

    def test_diagonal_expansion(self):
        q = general_to_quadratic(GeneralEllipse(np.diag([0.5, 1.0]), np.zeros(2)))
        assert np.allclose(q.A, np.diag([0.25, 1.0]))
        assert np.allclose(q.b, 0)
        assert q.c == pytest.approx(-1.0)

    def test_membership_cross_check(self, rng):
        # Oracle: the three forms are definitions; their membership
        # predicates must agree away from the boundary band.
        for _ in range(10):
            gen = random_general(rng)
            quad = general_to_quadratic(gen)
            std = quadratic_to_standard(quad)
            pts = std.xc + rng.uniform(-3, 3, size=(1000, 2)) * std.r2
            norm_val = np.linalg.norm(pts @ gen.A.T + gen.b, axis=1)
            quad_val = (np.einsum("ni,ij,nj->n", pts, quad.A, pts)
                        + 2.0 * pts @ quad.b + quad.c)
            keep = np.abs(norm_val - 1.0) > 1e-6
            in_gen = norm_val[keep] <= 1.0
            in_quad = quad_val[keep] <= 0.0
            in_std = contains(std, pts[keep])
            assert np.array_equal(in_gen, in_quad)
            assert np.array_equal(in_gen, in_std)


class TestQuadraticToStandard:
    def test_unit_disk(self):
        e = quadratic_to_standard(QuadraticEllipse(np.eye(2), np.zeros(2), -1.0))
        assert np.allclose(e.xc, 0)
        assert e.r1 == pytest.approx(1.0)
        assert e.r2 == pytest.approx(1.0)
        assert e.theta == 0.0
        assert e.near_circular

    def test_axis_aligned_major_x(self):
        # x^2/4 + y^2 <= 1: minor 1, major 2 along the x-axis; theta is
        # the major-axis direction, so it comes out zero here. Verified
        # below by the membership cross-check on boundary points.
        e = quadratic_to_standard(QuadraticEllipse(np.diag([0.25, 1.0]),
                                                   np.zeros(2), -1.0))
        assert e.r1 == pytest.approx(1.0, abs=1e-12)
        assert e.r2 == pytest.approx(2.0, abs=1e-12)
        assert angle_diff_mod_pi(e.theta, 0.0) < 1e-12
        boundary = np.array([[2, 0], [-2, 0], [0, 1], [0, -1.0]])
        assert contains(e, boundary, inflate=1e-9).all()
        d = boundary - e.xc
        vals = np.einsum("ni,ij,nj->n", d, e.shape_matrix(), d)
        assert np.allclose(vals, 1.0, atol=1e-12)

    def test_round_trip(self, rng):
        for _ in range(50):
            e = random_ellipse(rng)
            back = quadratic_to_standard(
                general_to_quadratic(standard_to_general(e)))
            assert np.allclose(back.xc, e.xc, atol=ROUND_TRIP_TOL)
            assert back.r1 == pytest.approx(e.r1, abs=ROUND_TRIP_TOL)
            assert back.r2 == pytest.approx(e.r2, abs=ROUND_TRIP_TOL)
            if not e.near_circular:
                assert angle_diff_mod_pi(back.theta, e.theta) < ROUND_TRIP_TOL


class TestContains:
    def test_center_of_unit_disk(self):
        disk = StandardEllipse.canonical((0, 0), 1, 1, 0)
        assert contains(disk, (0, 0))

    def test_boundary_margin(self):
        disk = StandardEllipse.canonical((0, 0), 1, 1, 0)
        assert not contains(disk, (1.001, 0), inflate=0.0)
        assert contains(disk, (1.001, 0), inflate=0.05)

    def test_boundary_samples_inside(self, rng):
        for _ in range(20):
            e = random_ellipse(rng)
            assert contains(e, boundary_sample(e, 64), inflate=1e-9).all()

    def test_inflate_must_be_nonnegative(self):
        disk = StandardEllipse.canonical((0, 0), 1, 1, 0)
        with pytest.raises(ValueError):
            contains(disk, (0, 0), inflate=-0.1)


class TestArea:
    def test_unit_disk(self):
        assert area(StandardEllipse.canonical((0, 0), 1, 1, 0)) == pytest.approx(np.pi)

    def test_one_by_two(self):
        assert area(StandardEllipse.canonical((0, 0), 1, 2, 0)) == pytest.approx(2 * np.pi)

    def test_representation_invariant(self, rng):
        for _ in range(25):
            e = random_ellipse(rng)
            gen = standard_to_general(e)
            assert area(gen) == pytest.approx(area(e), rel=1e-9)
            assert area(general_to_quadratic(gen)) == pytest.approx(area(e), rel=1e-9)


class TestBoundarySample:
    def test_unit_disk_axis_points(self):
        disk = StandardEllipse.canonical((0, 0), 1, 1, 0)
        pts = boundary_sample(disk, 4)
        expected = {(1, 0), (0, 1), (-1, 0), (0, -1)}
        got = {(round(x, 12), round(y, 12)) for x, y in pts}
        assert got == expected

    def test_polygon_area_oracle(self, rng):
        # Samples are in angular order on a convex curve, so the shoelace
        # area of the sample polygon is the inscribed-polygon area.
        for _ in range(20):
            e = random_ellipse(rng)
            poly = boundary_sample(e, 256)
            assert shoelace_area(poly) >= 0.999 * area(e)

    def test_rejects_tiny_counts(self):
        disk = StandardEllipse.canonical((0, 0), 1, 1, 0)
        with pytest.raises(ValueError):
            boundary_sample(disk, 3)


class TestObbOfPair:
    def test_identical_unit_disks(self):
        disk = StandardEllipse.canonical((0, 0), 1, 1, 0)
        box = obb_of_pair(disk, disk)
        assert np.allclose(box.half_extents, [1, 1], rtol=0.01)
        assert np.allclose(box.center, [0, 0], atol=0.01)

    def test_separated_disks(self):
        d1 = StandardEllipse.canonical((0, 0), 1, 1, 0)
        d2 = StandardEllipse.canonical((4, 0), 1, 1, 0)
        box = obb_of_pair(d1, d2)
        assert np.allclose(sorted(box.half_extents), [1, 3], rtol=0.02)

    def test_contains_all_samples(self, rng):
        for _ in range(30):
            e1, e2 = random_ellipse(rng), random_ellipse(rng)
            box = obb_of_pair(e1, e2)
            samples = np.vstack([boundary_sample(e1, 64), boundary_sample(e2, 64)])
            assert box.contains(samples, atol=1e-9).all()


class TestValidation:
    def test_general_requires_spd(self):
        with pytest.raises(ValueError):
            GeneralEllipse(np.diag([1.0, -1.0]), np.zeros(2))
        with pytest.raises(ValueError):
            GeneralEllipse(np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2))

    def test_quadratic_requires_interior(self):
        with pytest.raises(ValueError):
            QuadraticEllipse(np.eye(2), np.zeros(2), 1.0)

    def test_standard_axis_ordering(self):
        with pytest.raises(ValueError):
            StandardEllipse((0, 0), 2.0, 1.0, 0.0)
        e = StandardEllipse.canonical((0, 0), 2.0, 1.0, 0.0)
        assert (e.r1, e.r2) == (1.0, 2.0)
        assert e.theta == pytest.approx(np.pi / 2)

    def test_canonical_wraps_theta(self):
        e = StandardEllipse.canonical((0, 0), 1.0, 2.0, np.pi + 0.3)
        assert e.theta == pytest.approx(0.3)

    def test_near_circular_theta_zeroed(self):
        e = StandardEllipse.canonical((0, 0), 1.0, 1.0 + 1e-12, 1.1)
        assert e.theta == 0.0
        assert e.near_circular
