"""Scenario engine: ground-truth obstacles, point sampling, episodes.

Obstacles are rigid polygons with constant linear and angular velocity.
Point clouds are sampled uniformly by arc length along the posed
outlines with additive Gaussian noise, deterministically per
(seed, time). The closed loop per frame is: sample, identify ellipses,
update tracks, solve the planner, apply the first control. Collision
is always judged against the ground-truth polygons, never against the
identified ellipses.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .geometry import StandardEllipse, rotation
from .pipeline import PipelineConfig, identify
from .planner import MpcConfig, MpcSolution, VehicleState, solve_mpc, step_dynamics, warm_start
from .tracking import FeatureVector, Track, TrackerConfig, track_update

GOAL_TOLERANCE = 0.2  # m


@dataclass(frozen=True, eq=False)
class Obstacle:
    """Rigid polygon with constant-velocity, constant-spin motion."""

    outline: np.ndarray       # (k, 2) closed polygon in the body frame
    position: np.ndarray      # world position of the body origin at t=0
    orientation: float = 0.0
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    omega: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "outline",
                           np.asarray(self.outline, dtype=float).reshape(-1, 2))
        object.__setattr__(self, "position",
                           np.asarray(self.position, dtype=float).reshape(2))
        object.__setattr__(self, "velocity",
                           np.asarray(self.velocity, dtype=float).reshape(2))
        if len(self.outline) < 3:
            raise ValueError("outline needs at least 3 vertices")

    def polygon_at(self, t: float) -> np.ndarray:
        """World-frame vertices at time t."""
        angle = self.orientation + self.omega * t
        pos = self.position + self.velocity * t
        return pos + self.outline @ rotation(angle).T

    def perimeter(self) -> float:
        closed = np.vstack([self.outline, self.outline[:1]])
        return float(np.linalg.norm(np.diff(closed, axis=0), axis=1).sum())

    def is_static(self) -> bool:
        return float(np.linalg.norm(self.velocity)) == 0.0 and self.omega == 0.0


@dataclass(frozen=True, eq=False)
class Scenario:
    obstacles: list[Obstacle]
    vehicle_start: VehicleState
    goal: np.ndarray
    point_density: float          # points per meter of outline
    sensor_noise_sigma: float = 0.01
    frame_dt: float = 0.1
    duration: float = 10.0
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "goal",
                           np.asarray(self.goal, dtype=float).reshape(2))

    def total_points(self) -> int:
        total = sum(ob.perimeter() for ob in self.obstacles)
        return int(round(self.point_density * total))


def sample_points(scenario: Scenario, t: float) -> np.ndarray:
    """Point cloud of all posed outlines at time t.

    Counts are apportioned to obstacles by perimeter (largest remainder,
    index tie-break), so the total matches the scenario's target exactly
    and stays constant across frames. Noise is reproducible per
    (scenario seed, time).
    """
    perims = np.array([ob.perimeter() for ob in scenario.obstacles])
    target = scenario.total_points()
    raw = scenario.point_density * perims
    counts = np.floor(raw).astype(int)
    remainder = target - counts.sum()
    if remainder > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:remainder]] += 1
    elif remainder < 0:
        order = np.argsort(raw - counts, kind="stable")
        counts[order[:-remainder]] -= 1

    pieces = []
    for ob, n in zip(scenario.obstacles, counts):
        if n <= 0:
            continue
        pieces.append(_sample_outline(ob.polygon_at(t), n))
    points = np.vstack(pieces) if pieces else np.zeros((0, 2))
    if scenario.sensor_noise_sigma > 0 and len(points):
        rng = np.random.default_rng([scenario.seed, int(round(t * 1e6)) & 0x7FFFFFFF])
        points = points + rng.normal(0.0, scenario.sensor_noise_sigma,
                                     size=points.shape)
    return points


def _sample_outline(polygon: np.ndarray, n: int) -> np.ndarray:
    closed = np.vstack([polygon, polygon[:1]])
    seg = np.diff(closed, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    s = (np.arange(n) + 0.5) * total / n
    idx = np.searchsorted(cum, s, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    frac = (s - cum[idx]) / np.maximum(seg_len[idx], 1e-300)
    return closed[idx] + seg[idx] * frac[:, None]


def point_polygon_distance(point, polygon: np.ndarray) -> float:
    """Distance from a point to a polygon; negative when inside."""
    p = np.asarray(point, dtype=float).reshape(2)
    closed = np.vstack([polygon, polygon[:1]])
    a = closed[:-1]
    seg = np.diff(closed, axis=0)
    seg_sq = np.maximum((seg ** 2).sum(axis=1), 1e-300)
    frac = np.clip(((p - a) * seg).sum(axis=1) / seg_sq, 0.0, 1.0)
    nearest = a + seg * frac[:, None]
    d = float(np.linalg.norm(nearest - p, axis=1).min())
    return -d if _point_in_polygon(p, polygon) else d


def _point_in_polygon(p: np.ndarray, polygon: np.ndarray) -> bool:
    x, y = p
    inside = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xcross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xcross:
                inside = not inside
    return inside


def ground_truth_collision(scenario: Scenario, t: float, vehicle_pos,
                           vehicle_radius: float) -> bool:
    """True iff the vehicle disc touches any posed obstacle (closed contact)."""
    for ob in scenario.obstacles:
        if point_polygon_distance(vehicle_pos, ob.polygon_at(t)) <= vehicle_radius:
            return True
    return False


def clearance(scenario: Scenario, t: float, vehicle_pos,
              vehicle_radius: float) -> float:
    """Signed distance from the vehicle disc to the nearest obstacle."""
    if not scenario.obstacles:
        return np.inf
    d = min(point_polygon_distance(vehicle_pos, ob.polygon_at(t))
            for ob in scenario.obstacles)
    return d - vehicle_radius


@dataclass(frozen=True, eq=False)
class FrameRecord:
    time: float
    points: np.ndarray
    ellipses: list[StandardEllipse]
    tracks: list[Track]
    mpc: MpcSolution
    vehicle: VehicleState
    identification_ms: float
    planning_ms: float
    clearance: float


@dataclass(frozen=True, eq=False)
class EpisodeOutcome:
    reached: bool
    time_to_goal: float
    min_clearance: float
    collisions: int


@dataclass(frozen=True, eq=False)
class EpisodeLog:
    frames: list[FrameRecord]
    outcome: EpisodeOutcome


class IdentifyFn:
    """Identification stage driven by the standard pipeline config."""

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg

    def __call__(self, points: np.ndarray) -> list[StandardEllipse]:
        ellipses, _ = identify(points, self.cfg)
        return ellipses


def episode_mpc_config(scenario: Scenario) -> MpcConfig:
    """Planner config used for closed-loop episodes.

    Relative to the bare planner defaults this steps the model at the
    scenario frame period, raises the slack penalty so avoidance
    dominates goal tracking at map-scale distances, weights position
    over velocity in the tracking error so the vehicle actually
    cruises, and plans with a safety buffer beyond the vehicle radius.
    """
    return MpcConfig(dt=scenario.frame_dt, slack_weight=200.0,
                     safety_margin=0.15, collision_substeps=3,
                     q_weights=np.diag([1.0, 1.0, 0.05, 0.05]),
                     p_weights=np.diag([0.01, 0.01]))


def run_episode(scenario: Scenario,
                pipeline_cfg: PipelineConfig = PipelineConfig(),
                tracker_cfg: TrackerConfig = TrackerConfig(),
                mpc_cfg: MpcConfig | None = None,
                identify_fn=None) -> EpisodeLog:
    """Run the closed loop until the goal, a collision, or the duration.

    ``identify_fn`` may replace the identification stage (used by the
    baseline comparisons); it maps a point array to a list of standard
    ellipses. When no planner config is given, :func:`episode_mpc_config`
    supplies one matched to the scenario frame period.
    """
    if mpc_cfg is None:
        mpc_cfg = episode_mpc_config(scenario)
    stage = identify_fn if identify_fn is not None else IdentifyFn(pipeline_cfg)

    vehicle = scenario.vehicle_start
    tracks: list[Track] = []
    frames: list[FrameRecord] = []
    previous: MpcSolution | None = None
    reached = False
    collided = False
    time_to_goal = np.inf
    min_clear = np.inf

    n_frames = int(np.floor(scenario.duration / scenario.frame_dt))
    for k in range(n_frames):
        t = k * scenario.frame_dt
        points = sample_points(scenario, t)

        t0 = time.perf_counter()
        ellipses = stage(points) if len(points) else []
        t1 = time.perf_counter()
        observations = [(FeatureVector.from_ellipse(e), t) for e in ellipses]
        tracks = track_update(tracks, observations, tracker_cfg)
        sol = solve_mpc(vehicle, scenario.goal, tracks, mpc_cfg,
                        u_init=warm_start(previous, mpc_cfg.horizon))
        t2 = time.perf_counter()
        previous = sol

        clear = clearance(scenario, t, vehicle.position, mpc_cfg.vehicle_radius)
        min_clear = min(min_clear, clear)
        frames.append(FrameRecord(t, points, ellipses, tracks, sol, vehicle,
                                  (t1 - t0) * 1e3, (t2 - t1) * 1e3, clear))

        u0 = sol.controls[0]
        nxt = step_dynamics(vehicle, u0, scenario.frame_dt, mpc_cfg.mass)
        t_next = (k + 1) * scenario.frame_dt
        if _swept_collision(scenario, t, t_next, vehicle, nxt,
                            mpc_cfg.vehicle_radius):
            collided = True
            vehicle = nxt
            break
        vehicle = nxt
        if float(np.linalg.norm(vehicle.position - scenario.goal)) < GOAL_TOLERANCE:
            reached = True
            time_to_goal = t_next
            break

    outcome = EpisodeOutcome(reached, float(time_to_goal), float(min_clear),
                             1 if collided else 0)
    return EpisodeLog(frames, outcome)


def _swept_collision(scenario, t0, t1, before: VehicleState,
                     after: VehicleState, radius: float,
                     substeps: int = 4) -> bool:
    """Collision check along the frame's motion segment, not just endpoints."""
    for i in range(1, substeps + 1):
        frac = i / substeps
        pos = before.position + frac * (after.position - before.position)
        if ground_truth_collision(scenario, t0 + frac * (t1 - t0), pos, radius):
            return True
    return False


def straight_line_time_bound(scenario: Scenario, mpc_cfg: MpcConfig) -> float:
    """Time-optimal straight-run lower bound from rest under the force box."""
    d = float(np.linalg.norm(scenario.goal - scenario.vehicle_start.position))
    accel = mpc_cfg.u_max / mpc_cfg.mass
    v_max = mpc_cfg.v_max
    d_ramp = v_max ** 2 / (2.0 * accel)
    if d <= d_ramp:
        return float(np.sqrt(2.0 * d / accel))
    return float(d / v_max + v_max / (2.0 * accel))


# --- Scenario (de)serialization -------------------------------------------

def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "obstacles": [
            {
                "outline": ob.outline.tolist(),
                "position": ob.position.tolist(),
                "orientation": ob.orientation,
                "velocity": ob.velocity.tolist(),
                "omega": ob.omega,
            }
            for ob in s.obstacles
        ],
        "vehicle_start": list(s.vehicle_start.as_array()),
        "goal": s.goal.tolist(),
        "density": s.point_density,
        "noise": s.sensor_noise_sigma,
        "dt": s.frame_dt,
        "duration": s.duration,
        "seed": s.seed,
    }


_SCENARIO_KEYS = {"name", "obstacles", "vehicle_start", "goal", "density",
                  "noise", "dt", "duration", "seed"}
_OBSTACLE_KEYS = {"outline", "position", "orientation", "velocity", "omega"}


def scenario_from_dict(d: dict) -> Scenario:
    unknown = set(d) - _SCENARIO_KEYS
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    obstacles = []
    for od in d["obstacles"]:
        bad = set(od) - _OBSTACLE_KEYS
        if bad:
            raise ValueError(f"unknown obstacle keys: {sorted(bad)}")
        obstacles.append(Obstacle(
            outline=od["outline"],
            position=od["position"],
            orientation=float(od.get("orientation", 0.0)),
            velocity=od.get("velocity", (0.0, 0.0)),
            omega=float(od.get("omega", 0.0)),
        ))
    return Scenario(
        obstacles=obstacles,
        vehicle_start=VehicleState.from_array(d["vehicle_start"]),
        goal=d["goal"],
        point_density=float(d["density"]),
        sensor_noise_sigma=float(d.get("noise", 0.01)),
        frame_dt=float(d.get("dt", 0.1)),
        duration=float(d.get("duration", 10.0)),
        seed=int(d.get("seed", 0)),
        name=str(d.get("name", "")),
    )


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def builtin_maps() -> list[Scenario]:
    """The five canonical test scenarios, loaded from packaged fixtures."""
    maps = []
    for i in range(1, 6):
        text = resources.files("ellid").joinpath(f"maps/map{i}.json").read_text()
        maps.append(scenario_from_dict(json.loads(text)))
    return maps


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    return replace(scenario, seed=seed)
