"""Frame-to-frame ellipse association and motion estimation.

Each identified ellipse is summarized by the feature vector
(center, minor axis, major axis, orientation). Features from
consecutive frames are matched greedily by ascending Euclidean
distance (with the orientation difference wrapped to the half turn),
and matched observations feed a constant-velocity Kalman filter over
position, orientation, and their rates. Orientation lives on [0, pi):
an ellipse and its half-turn rotation are the same set, so angular
rates faster than pi/(2 dt) alias.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import StandardEllipse, wrap_half_turn


class ZeroDt(ValueError):
    """Motion estimation requires a positive time step."""


def wrap_orientation_diff(delta: float) -> float:
    """Signed shortest orientation change, in [-pi/2, pi/2)."""
    return float((delta + np.pi / 2.0) % np.pi - np.pi / 2.0)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Ellipse summary used for data association."""

    xc: np.ndarray
    r1: float
    r2: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "xc", np.asarray(self.xc, dtype=float).reshape(2))
        object.__setattr__(self, "theta", wrap_half_turn(self.theta))

    @classmethod
    def from_ellipse(cls, e: StandardEllipse) -> "FeatureVector":
        return cls(e.xc, e.r1, e.r2, e.theta)

    def as_array(self) -> np.ndarray:
        return np.array([self.xc[0], self.xc[1], self.r1, self.r2, self.theta])


def feature_distance(f1: FeatureVector, f2: FeatureVector,
                     weights=None) -> float:
    """Euclidean feature distance with the angle difference wrapped.

    Optional per-component weights (x, y, r1, r2, theta) rescale the
    mixed units; the default leaves all components at weight 1.
    """
    d = f1.as_array() - f2.as_array()
    gap = abs(d[4]) % np.pi
    d[4] = min(gap, np.pi - gap)  # unsigned and exactly symmetric
    if weights is not None:
        d = d * np.asarray(weights, dtype=float)
    return float(np.linalg.norm(d))


@dataclass(frozen=True, eq=False)
class MatchResult:
    pairs: list[tuple[int | None, int]]  # (previous index or None, current index)
    unmatched_prev: list[int]


def match_frames(prev: list[FeatureVector], curr: list[FeatureVector],
                 gate: float = np.inf, weights=None) -> MatchResult:
    """One-to-one greedy matching by globally ascending feature distance.

    Pairs beyond the gate are left unmatched: those current features are
    reported as new (prev index None), and leftover previous indices are
    returned for missed-count bookkeeping.
    """
    candidates = []
    for i, f_prev in enumerate(prev):
        for j, f_curr in enumerate(curr):
            d = feature_distance(f_prev, f_curr, weights)
            if d <= gate:
                candidates.append((d, i, j))
    candidates.sort()

    prev_used = set()
    curr_matched: dict[int, int] = {}
    for _, i, j in candidates:
        if i in prev_used or j in curr_matched:
            continue
        prev_used.add(i)
        curr_matched[j] = i
    pairs: list[tuple[int | None, int]] = [
        (curr_matched.get(j), j) for j in range(len(curr))
    ]
    unmatched_prev = [i for i in range(len(prev)) if i not in prev_used]
    return MatchResult(pairs, unmatched_prev)


def estimate_motion(prev: FeatureVector, curr: FeatureVector,
                    dt: float) -> tuple[np.ndarray, float]:
    """Finite-difference linear and angular velocity between two frames."""
    if dt <= 0:
        raise ZeroDt(f"dt must be positive, got {dt}")
    v = (curr.xc - prev.xc) / dt
    omega = wrap_orientation_diff(curr.theta - prev.theta) / dt
    return v, float(omega)


@dataclass(frozen=True)
class TrackerConfig:
    gate_distance: float = 1.0
    process_noise_pos: float = 0.1    # white-acceleration intensity, position axes
    process_noise_ang: float = 0.01   # white-acceleration intensity, orientation
    meas_noise_pos: float = 0.01      # m^2
    meas_noise_ang: float = 0.01      # rad^2
    max_missed: int = 3
    initial_velocity_var: float = 100.0  # spawn uncertainty on rates

    def __post_init__(self):
        if min(self.process_noise_pos, self.process_noise_ang,
               self.meas_noise_pos, self.meas_noise_ang) <= 0:
            raise ValueError("noise intensities must be positive")
        if self.gate_distance <= 0:
            raise ValueError("gate_distance must be positive")


@dataclass(frozen=True, eq=False)
class Track:
    """Kalman state of one obstacle: pose, rates, and latest shape."""

    id: int
    state: np.ndarray       # [x, y, theta, vx, vy, omega]
    covariance: np.ndarray  # 6x6
    shape: tuple[float, float]  # (r1, r2) from the latest observation
    last_seen: float
    age: int = 1
    missed: int = 0

    @property
    def position(self) -> np.ndarray:
        return self.state[:2]

    @property
    def velocity(self) -> np.ndarray:
        return self.state[3:5]

    @property
    def omega(self) -> float:
        return float(self.state[5])

    def feature(self) -> FeatureVector:
        return FeatureVector(self.state[:2], self.shape[0], self.shape[1],
                             self.state[2])


def _transition(dt: float) -> np.ndarray:
    f = np.eye(6)
    f[0, 3] = f[1, 4] = f[2, 5] = dt
    return f


def _process_noise(dt: float, cfg: TrackerConfig) -> np.ndarray:
    q = np.zeros((6, 6))
    block = np.array([[dt ** 3 / 3.0, dt ** 2 / 2.0],
                      [dt ** 2 / 2.0, dt]])
    for axis, intensity in ((0, cfg.process_noise_pos),
                            (1, cfg.process_noise_pos),
                            (2, cfg.process_noise_ang)):
        sub = intensity * block
        q[axis, axis] = sub[0, 0]
        q[axis, axis + 3] = sub[0, 1]
        q[axis + 3, axis] = sub[1, 0]
        q[axis + 3, axis + 3] = sub[1, 1]
    return q


_H = np.hstack([np.eye(3), np.zeros((3, 3))])


def _predict(track: Track, t: float, cfg: TrackerConfig) -> tuple[np.ndarray, np.ndarray]:
    dt = t - track.last_seen
    f = _transition(dt)
    state = f @ track.state
    state[2] = wrap_half_turn(state[2])
    cov = f @ track.covariance @ f.T + _process_noise(dt, cfg)
    return state, cov


def track_update(tracks: list[Track],
                 observations: list[tuple[FeatureVector, float]],
                 cfg: TrackerConfig = TrackerConfig()) -> list[Track]:
    """Advance all tracks to the observation time and associate features.

    Matched tracks get a measurement update on (x, y, theta) with the
    angle innovation wrapped; unmatched observations spawn tracks at
    zero velocity with inflated rate covariance; tracks missing for more
    than ``cfg.max_missed`` frames are dropped.
    """
    if not observations:
        return _coast_all(tracks, cfg)
    t = observations[0][1]
    if any(abs(ts - t) > 1e-12 for _, ts in observations):
        raise ValueError("observations must share one timestamp")
    if any(trk.last_seen > t + 1e-12 for trk in tracks):
        raise ValueError("observation timestamp predates a track")

    predicted = [_predict(trk, t, cfg) for trk in tracks]
    pred_features = [
        FeatureVector(state[:2], trk.shape[0], trk.shape[1], state[2])
        for trk, (state, _) in zip(tracks, predicted)
    ]
    features = [f for f, _ in observations]
    matching = match_frames(pred_features, features, cfg.gate_distance)

    r = np.diag([cfg.meas_noise_pos, cfg.meas_noise_pos, cfg.meas_noise_ang])
    out: list[Track] = []
    matched_prev = set()
    for prev_idx, curr_idx in matching.pairs:
        if prev_idx is None:
            continue
        matched_prev.add(prev_idx)
        trk = tracks[prev_idx]
        state, cov = predicted[prev_idx]
        f = features[curr_idx]
        z = np.array([f.xc[0], f.xc[1], f.theta])
        innovation = z - _H @ state
        innovation[2] = wrap_orientation_diff(innovation[2])
        s = _H @ cov @ _H.T + r
        gain = cov @ _H.T @ np.linalg.inv(s)
        new_state = state + gain @ innovation
        new_state[2] = wrap_half_turn(new_state[2])
        new_cov = (np.eye(6) - gain @ _H) @ cov
        new_cov = 0.5 * (new_cov + new_cov.T)
        out.append(replace(trk, state=new_state, covariance=new_cov,
                           shape=(f.r1, f.r2), last_seen=t,
                           age=trk.age + 1, missed=0))

    for prev_idx in matching.unmatched_prev:
        trk = tracks[prev_idx]
        if trk.missed + 1 > cfg.max_missed:
            continue
        state, cov = predicted[prev_idx]
        out.append(replace(trk, state=state, covariance=cov, last_seen=t,
                           age=trk.age + 1, missed=trk.missed + 1))

    next_id = max((trk.id for trk in tracks), default=-1) + 1
    for prev_idx, curr_idx in matching.pairs:
        if prev_idx is not None:
            continue
        f = features[curr_idx]
        state = np.array([f.xc[0], f.xc[1], f.theta, 0.0, 0.0, 0.0])
        cov = np.diag([cfg.meas_noise_pos, cfg.meas_noise_pos,
                       cfg.meas_noise_ang,
                       cfg.initial_velocity_var, cfg.initial_velocity_var,
                       cfg.initial_velocity_var])
        out.append(Track(next_id, state, cov, (f.r1, f.r2), t))
        next_id += 1

    out.sort(key=lambda trk: trk.id)
    return out


def _coast_all(tracks: list[Track], cfg: TrackerConfig) -> list[Track]:
    kept = []
    for trk in tracks:
        if trk.missed + 1 > cfg.max_missed:
            continue
        kept.append(replace(trk, missed=trk.missed + 1))
    return kept


def predict_ellipse(track: Track, horizon_dt: float) -> StandardEllipse:
    """Ellipse the track implies after coasting for ``horizon_dt``."""
    if horizon_dt < 0:
        raise ValueError("horizon_dt must be nonnegative")
    xc = track.position + track.velocity * horizon_dt
    theta = wrap_half_turn(track.state[2] + track.omega * horizon_dt)
    r1, r2 = track.shape
    return StandardEllipse.canonical(xc, r1, r2, theta)


class EllipseTracker:
    """Stateful convenience wrapper owning the track list."""

    def __init__(self, cfg: TrackerConfig = TrackerConfig()):
        self.cfg = cfg
        self.tracks: list[Track] = []

    def update(self, ellipses: list[StandardEllipse], t: float) -> list[Track]:
        observations = [(FeatureVector.from_ellipse(e), t) for e in ellipses]
        self.tracks = track_update(self.tracks, observations, self.cfg)
        return self.tracks
