"""Ellipsoid-based obstacle identification, tracking, and avoidance.

Identify arbitrary 2-D obstacles in point clouds as minimum-area
ellipse sets without knowing the cluster count, match and motion-track
the ellipses across frames, and close the loop with a soft-constrained
receding-horizon planner in a reproducible scenario simulator.
"""

from .clustering import (ClusterResult, EmptyInput, VigmmConfig,
                         dbscan_baseline, fit_vigmm, kmeans_baseline,
                         responsibilities)
from .geometry import (GeneralEllipse, OrientedBox, QuadraticEllipse,
                       StandardEllipse, area, boundary_sample, contains,
                       general_to_quadratic, general_to_standard, obb_of_pair,
                       quadratic_to_standard, standard_to_general)
from .mvee import MveeConfig, MveeResult, TooFewPoints, enclosing_ellipse, khachiyan_mvee
from .pipeline import PipelineConfig, StageTimings, assign_points, identify
from .planner import (MpcConfig, MpcSolution, SolverStatus, VehicleState,
                      collision_margin, solve_mpc, step_dynamics)
from .refinement import RefinementConfig, refine, union_ellipse, volume_ratio
from .simulator import (EpisodeLog, Obstacle, Scenario, builtin_maps,
                        ground_truth_collision, run_episode, sample_points)
from .tracking import (EllipseTracker, FeatureVector, Track, TrackerConfig,
                       ZeroDt, estimate_motion, feature_distance, match_frames,
                       predict_ellipse, track_update)

__version__ = "0.1.0"

__all__ = [
    "ClusterResult", "EmptyInput", "VigmmConfig", "dbscan_baseline",
    "fit_vigmm", "kmeans_baseline", "responsibilities",
    "GeneralEllipse", "OrientedBox", "QuadraticEllipse", "StandardEllipse",
    "area", "boundary_sample", "contains", "general_to_quadratic",
    "general_to_standard", "obb_of_pair", "quadratic_to_standard",
    "standard_to_general",
    "MveeConfig", "MveeResult", "TooFewPoints", "enclosing_ellipse",
    "khachiyan_mvee",
    "PipelineConfig", "StageTimings", "assign_points", "identify",
    "MpcConfig", "MpcSolution", "SolverStatus", "VehicleState",
    "collision_margin", "solve_mpc", "step_dynamics",
    "RefinementConfig", "refine", "union_ellipse", "volume_ratio",
    "EpisodeLog", "Obstacle", "Scenario", "builtin_maps",
    "ground_truth_collision", "run_episode", "sample_points",
    "EllipseTracker", "FeatureVector", "Track", "TrackerConfig", "ZeroDt",
    "estimate_motion", "feature_distance", "match_frames", "predict_ellipse",
    "track_update",
]
