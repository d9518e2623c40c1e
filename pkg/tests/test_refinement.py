import numpy as np
import pytest

from conftest import interior_samples, random_ellipse
from ellid.geometry import StandardEllipse, area, boundary_sample, contains
from ellid.mvee import MveeConfig, khachiyan_mvee
from ellid.refinement import RefinementConfig, refine, union_ellipse, volume_ratio


def disk(x, y, r=1.0):
    return StandardEllipse.canonical((x, y), r, r, 0.0)


class TestVolumeRatio:
    def test_coincident_unit_disks(self):
        # Box is 2x2 regardless of angle, so the ratio is 2*pi/4.
        assert volume_ratio(disk(0, 0), disk(0, 0)) == pytest.approx(np.pi / 2, rel=0.01)

    def test_distant_disks(self):
        got = volume_ratio(disk(0, 0), disk(100, 0))
        assert got == pytest.approx(2 * np.pi / 204, rel=0.02)

    def test_symmetric(self, rng):
        for _ in range(20):
            e1, e2 = random_ellipse(rng), random_ellipse(rng)
            assert volume_ratio(e1, e2) == volume_ratio(e2, e1)

    def test_range(self, rng):
        for _ in range(30):
            r = volume_ratio(random_ellipse(rng), random_ellipse(rng))
            assert 0 < r <= np.pi / 2 + 1e-9


class TestUnionEllipse:
    def test_idempotent_on_identical_disks(self):
        u = union_ellipse(disk(0, 0), disk(0, 0))
        assert np.allclose(u.xc, 0, atol=0.05)
        assert u.r1 == pytest.approx(1.0, rel=0.05)
        assert u.r2 == pytest.approx(1.0, rel=0.05)

    def test_two_disks_on_axis(self):
        # Oracles: a dense-sample fit at tight tolerance, and the
        # support-function optimum of the two-disk cover (semi-axes
        # 3.3455 x 1.3163; an ellipse through (+-3, 0) with r1 = 1 would
        # have vertex curvature 3 and could not contain unit disks).
        d1, d2 = disk(-2, 0), disk(2, 0)
        u = union_ellipse(d1, d2)
        dense = np.vstack([boundary_sample(d1, 512), boundary_sample(d2, 512)])
        ref = khachiyan_mvee(dense, MveeConfig(epsilon=1e-4)).standard
        assert np.allclose(u.xc, ref.xc, atol=0.05)
        assert u.r1 == pytest.approx(ref.r1, rel=0.03)
        assert u.r2 == pytest.approx(ref.r2, rel=0.03)
        assert u.r2 == pytest.approx(3.3455, rel=0.03)
        assert u.r1 == pytest.approx(1.3163, rel=0.03)
        assert min(abs(u.theta), np.pi - u.theta) < 0.05

    def test_interior_containment(self, rng):
        cfg = RefinementConfig()
        eps = cfg.mvee.epsilon
        for _ in range(15):
            e1, e2 = random_ellipse(rng), random_ellipse(rng)
            u = union_ellipse(e1, e2, cfg)
            for e in (e1, e2):
                samples = interior_samples(e, 1024, rng)
                assert contains(u, samples, inflate=eps).all()

    def test_area_never_below_inputs(self, rng):
        for _ in range(30):
            e1, e2 = random_ellipse(rng), random_ellipse(rng)
            u = union_ellipse(e1, e2)
            assert area(u) >= max(area(e1), area(e2)) - 1e-12


class TestRefine:
    def test_empty(self):
        assert refine([]) == []

    def test_coincident_disks_merge(self):
        out = refine([disk(0, 0), disk(0, 0)])
        assert len(out) == 1

    def test_far_disk_survives(self):
        ells = [disk(0, 0), disk(1.5, 0), disk(100, 0)]
        assert volume_ratio(ells[0], ells[1]) == pytest.approx(2 * np.pi / 7, rel=0.02)
        out = refine(ells)
        assert len(out) == 2

    def test_fixpoint_in_count(self, rng):
        for _ in range(10):
            ells = [random_ellipse(rng, center_scale=6.0) for _ in range(6)]
            once = refine(ells)
            twice = refine(once)
            assert len(twice) == len(once)

    def test_output_not_larger(self, rng):
        for _ in range(10):
            ells = [random_ellipse(rng, center_scale=4.0) for _ in range(8)]
            assert len(refine(ells)) <= len(ells)

    def test_coverage_preserved(self, rng):
        cfg = RefinementConfig()
        eps = cfg.mvee.epsilon
        for _ in range(8):
            ells = [random_ellipse(rng, center_scale=3.0) for _ in range(5)]
            out = refine(ells, cfg)
            for e in ells:
                samples = interior_samples(e, 200, rng)
                covered = np.zeros(len(samples), dtype=bool)
                for o in out:
                    covered |= contains(o, samples, inflate=2 * eps)
                assert covered.all()

    def test_threshold_monotonicity(self, rng):
        for _ in range(8):
            ells = [random_ellipse(rng, center_scale=5.0) for _ in range(7)]
            counts = []
            for threshold in (0.3, 0.6, 0.9):
                cfg = RefinementConfig(ratio_threshold=threshold)
                counts.append(len(refine(ells, cfg)))
            assert counts == sorted(counts)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RefinementConfig(ratio_threshold=0.0)
        with pytest.raises(ValueError):
            RefinementConfig(union_samples=8)
