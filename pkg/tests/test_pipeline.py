import numpy as np
import pytest

from ellid.clustering import EmptyInput, VigmmConfig
from ellid.geometry import contains
from ellid.pipeline import PipelineConfig, assign_points, identify
from ellid.refinement import refine
from ellid.simulator import builtin_maps, sample_points


def coverage_ok(points, ellipses, inflate):
    covered = np.zeros(len(points), dtype=bool)
    for e in ellipses:
        covered |= contains(e, points, inflate=inflate)
    return covered.all()


class TestIdentify:
    def test_map1_fixture_gives_six(self):
        pts = sample_points(builtin_maps()[0], 0.0)
        ellipses, timings = identify(pts, PipelineConfig())
        assert len(ellipses) == 6
        assert timings.total_ms > 0

    def test_single_blob(self, rng):
        pts = rng.normal([2, 3], 0.2, size=(80, 2))
        ellipses, _ = identify(pts, PipelineConfig(vigmm=VigmmConfig(seed=0)))
        assert len(ellipses) == 1

    def test_separation_sweep(self, rng):
        blob = rng.normal(0.0, 0.25, size=(60, 2))
        cfg = PipelineConfig(vigmm=VigmmConfig(seed=1))
        far = np.vstack([blob, blob + [12.0, 0.0]])
        near = np.vstack([blob, blob + [0.05, 0.0]])
        ellipses_far, _ = identify(far, cfg)
        ellipses_near, _ = identify(near, cfg)
        assert len(ellipses_far) == 2
        assert len(ellipses_near) == 1
        eps = cfg.mvee.epsilon
        assert coverage_ok(far, ellipses_far, 2 * eps)
        assert coverage_ok(near, ellipses_near, 2 * eps)

    def test_coverage_invariant(self, rng):
        cfg = PipelineConfig(vigmm=VigmmConfig(seed=3))
        eps = cfg.mvee.epsilon
        for _ in range(5):
            pts = np.vstack([
                rng.normal(rng.uniform(-8, 8, 2), rng.uniform(0.1, 0.8),
                           size=(rng.integers(3, 60), 2))
                for _ in range(rng.integers(1, 5))
            ])
            ellipses, _ = identify(pts, cfg)
            assert coverage_ok(pts, ellipses, 2 * eps)

    def test_count_bounds_and_idempotence(self, rng):
        cfg = PipelineConfig(vigmm=VigmmConfig(seed=4))
        pts = rng.uniform(-6, 6, size=(300, 2))
        ellipses, _ = identify(pts, cfg)
        assert len(ellipses) <= cfg.vigmm.n_max
        again = refine(ellipses, cfg.refine)
        assert len(again) == len(ellipses)

    def test_tiny_cluster_fallback(self):
        pts = np.array([[0.0, 0.0], [20.0, 20.0]])
        ellipses, _ = identify(pts, PipelineConfig(vigmm=VigmmConfig(seed=0)))
        assert coverage_ok(pts, ellipses, 0.1)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            identify(np.zeros((0, 2)), PipelineConfig())


class TestAssignPoints:
    def test_assigns_to_best_ellipse(self, rng):
        pts = np.vstack([rng.normal([0, 0], 0.2, (40, 2)),
                         rng.normal([8, 0], 0.2, (40, 2))])
        ellipses, _ = identify(pts, PipelineConfig(vigmm=VigmmConfig(seed=0)))
        owner = assign_points(pts, ellipses)
        assert len(np.unique(owner[:40])) == 1
        assert len(np.unique(owner[40:])) == 1
        assert owner[0] != owner[-1]

    def test_requires_ellipses(self):
        with pytest.raises(ValueError):
            assign_points(np.zeros((3, 2)), [])
