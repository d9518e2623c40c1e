"""Command-line front end.

Commands::

    ellid identify POINTS_FILE   fit obstacle ellipses to one point cloud
    ellid track FRAMES_DIR       track ellipses across timestamped frames
    ellid run SCENARIO           closed-loop episode on a scenario (or map1..map5)
    ellid bench                  identification timing and planner comparison

Common flags: --config PATH (JSON overrides), --seed N, --out DIR,
--svg. Exit codes: 0 success, 2 input error, 3 empty input, 4 episode
collision. Set ELLID_LOG to control log verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import fileio, render
from .clustering import VigmmConfig, dbscan_baseline, kmeans_baseline
from .mvee import MveeConfig, enclosing_ellipse
from .pipeline import PipelineConfig, assign_points, identify
from .planner import MpcConfig
from .refinement import RefinementConfig
from .simulator import Scenario, builtin_maps, load_scenario, run_episode, sample_points, with_seed
from .tracking import EllipseTracker, TrackerConfig

log = logging.getLogger("ellid")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY = 3
EXIT_COLLISION = 4

# k for the fixed-cluster-count baseline, per comparison map.
KMEANS_K = {1: 6, 3: 4, 4: 4, 5: 12}
DBSCAN_DEFAULTS = {"eps": 0.5, "min_pts": 5}


class ConfigError(ValueError):
    pass


def _dataclass_from_dict(cls, overrides: dict, context: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {sorted(unknown)}")
    cleaned = {}
    for key, value in overrides.items():
        if key in ("q_weights", "p_weights", "wishart_scale") and value is not None:
            value = np.asarray(value, dtype=float)
        if key == "mvee" and isinstance(value, dict):
            value = _dataclass_from_dict(MveeConfig, value, f"{context}.mvee")
        cleaned[key] = value
    return cls(**cleaned)


_SECTIONS = {"vigmm", "mvee", "refine", "tracker", "mpc", "dbscan"}


def build_configs(config_path: str | None, seed: int | None):
    """Merge defaults < config file < flags into the per-module configs."""
    raw: dict = {}
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        unknown = set(raw) - _SECTIONS
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    vigmm_over = dict(raw.get("vigmm", {}))
    if seed is not None:
        vigmm_over["seed"] = seed
    vigmm = _dataclass_from_dict(VigmmConfig, vigmm_over, "vigmm")
    mvee = _dataclass_from_dict(MveeConfig, raw.get("mvee", {}), "mvee")
    refine_over = dict(raw.get("refine", {}))
    refine_over.setdefault("mvee", dataclasses.asdict(mvee))
    refine = _dataclass_from_dict(RefinementConfig, refine_over, "refine")
    tracker = _dataclass_from_dict(TrackerConfig, raw.get("tracker", {}), "tracker")
    mpc = _dataclass_from_dict(MpcConfig, raw.get("mpc", {}), "mpc")
    dbscan = {**DBSCAN_DEFAULTS, **raw.get("dbscan", {})}
    pipeline = PipelineConfig(vigmm=vigmm, mvee=mvee, refine=refine)
    return pipeline, tracker, mpc, dbscan


def _resolve_scenario(spec_arg: str, seed: int | None) -> Scenario:
    if spec_arg in {f"map{i}" for i in range(1, 6)}:
        scenario = builtin_maps()[int(spec_arg[3]) - 1]
    else:
        scenario = load_scenario(spec_arg)
    if seed is not None:
        scenario = with_seed(scenario, seed)
    return scenario


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_identify(args) -> int:
    try:
        points = fileio.read_points_file(args.points_file)
    except (fileio.PointFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if len(points) == 0:
        print("error: points file is empty", file=sys.stderr)
        return EXIT_EMPTY
    pipeline_cfg, _, _, _ = build_configs(args.config, args.seed)

    ellipses, timings = identify(points, pipeline_cfg)
    owner = assign_points(points, ellipses)
    sizes = [int((owner == i).sum()) for i in range(len(ellipses))]

    out = _out_dir(args)
    fileio.write_csv(out / "ellipses.csv", fileio.ELLIPSES_HEADER,
                     fileio.ellipse_rows(ellipses, sizes))
    fileio.write_csv(out / "timings.csv",
                     ["cluster_ms", "mvee_ms", "refine_ms", "total_ms"],
                     [[f"{timings.cluster_ms:.3f}", f"{timings.mvee_ms:.3f}",
                       f"{timings.refine_ms:.3f}", f"{timings.total_ms:.3f}"]])
    if args.svg:
        (out / "identify.svg").write_text(
            render.render_frame(points=points, ellipses=ellipses))
    print(f"identified {len(ellipses)} ellipses from {len(points)} points "
          f"in {timings.total_ms:.1f} ms (artifacts in {out})")
    return EXIT_OK


def cmd_track(args) -> int:
    try:
        frames = fileio.read_frames_dir(args.frames_dir)
    except (fileio.PointFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not frames:
        print("error: no frames found", file=sys.stderr)
        return EXIT_EMPTY
    pipeline_cfg, tracker_cfg, _, _ = build_configs(args.config, args.seed)

    tracker = EllipseTracker(tracker_cfg)
    rows = []
    for t, points in frames:
        if len(points) == 0:
            print(f"error: empty frame at t={t}", file=sys.stderr)
            return EXIT_INPUT
        ellipses, _ = identify(points, pipeline_cfg)
        tracks = tracker.update(ellipses, t)
        rows.extend(fileio.track_rows(t, tracks))

    out = _out_dir(args)
    fileio.write_csv(out / "tracks.csv", fileio.TRACKS_HEADER, rows)
    print(f"tracked {len(frames)} frames -> {out / 'tracks.csv'}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        scenario = _resolve_scenario(args.scenario, args.seed)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    pipeline_cfg, tracker_cfg, mpc_cfg, _ = build_configs(args.config, args.seed)
    if args.config is None or "mpc" not in _load_raw(args.config):
        mpc_cfg = dataclasses.replace(mpc_cfg, dt=scenario.frame_dt)

    log_ = run_episode(scenario, pipeline_cfg, tracker_cfg, mpc_cfg)
    out = _out_dir(args)
    fileio.write_csv(out / "episode.csv", fileio.EPISODE_HEADER,
                     fileio.episode_rows(log_))
    if args.svg:
        for i, frame in enumerate(log_.frames):
            svg = render.render_frame(
                points=frame.points, ellipses=frame.ellipses,
                polygons=[ob.polygon_at(frame.time) for ob in scenario.obstacles],
                trajectory=np.array([[f.vehicle.px, f.vehicle.py]
                                     for f in log_.frames[:i + 1]]),
                plan=frame.mpc.states[:, :2],
                vehicle=frame.vehicle.position, goal=scenario.goal)
            (out / f"frame_{i:04d}.svg").write_text(svg)

    o = log_.outcome
    ident_ms = float(np.mean([f.identification_ms for f in log_.frames])) if log_.frames else 0.0
    print(f"reached={o.reached} time_to_goal={o.time_to_goal:.2f}s "
          f"min_clearance={o.min_clearance:.3f}m collisions={o.collisions} "
          f"mean_identification_ms={ident_ms:.1f}")
    return EXIT_COLLISION if o.collisions else EXIT_OK


def _load_raw(config_path: str | None) -> dict:
    if not config_path:
        return {}
    with open(config_path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _baseline_identify(kind: str, map_index: int, dbscan_cfg: dict,
                       mvee_cfg: MveeConfig, seed: int):
    def stage(points):
        if kind == "kmeans":
            k = min(KMEANS_K.get(map_index, 6), len(points))
            clusters = kmeans_baseline(points, k, seed)
        else:
            clusters = dbscan_baseline(points, dbscan_cfg["eps"],
                                       dbscan_cfg["min_pts"])
        ellipses = []
        for i in range(len(clusters.components)):
            members = points[clusters.assignments == i]
            if len(members):
                ellipses.append(enclosing_ellipse(members, mvee_cfg).standard)
        return ellipses
    return stage


def cmd_bench(args) -> int:
    pipeline_cfg, tracker_cfg, mpc_cfg, dbscan_cfg = build_configs(
        args.config, args.seed)
    maps = builtin_maps()
    wanted = [int(m) for m in args.maps.split(",")] if args.maps else [1, 2, 3, 4, 5]

    timing_rows = []
    for idx in wanted:
        scenario = maps[idx - 1]
        points = sample_points(scenario, 0.0)
        samples = []
        for _ in range(args.reps):
            t0 = time.perf_counter()
            identify(points, pipeline_cfg)
            samples.append((time.perf_counter() - t0) * 1e3)
        timing_rows.append([f"map{idx}", len(points), args.reps,
                            f"{np.median(samples):.3f}",
                            f"{np.percentile(samples, 95):.3f}"])

    episode_rows = []
    if not args.skip_episodes:
        for idx in [m for m in wanted if m in KMEANS_K]:
            scenario = maps[idx - 1]
            cfg = dataclasses.replace(mpc_cfg, dt=scenario.frame_dt)
            for kind in ("ours", "kmeans", "dbscan"):
                stage = (None if kind == "ours" else
                         _baseline_identify(kind, idx, dbscan_cfg,
                                            pipeline_cfg.mvee,
                                            pipeline_cfg.vigmm.seed))
                log_ = run_episode(scenario, pipeline_cfg, tracker_cfg, cfg,
                                   identify_fn=stage)
                o = log_.outcome
                episode_rows.append([f"map{idx}", kind, o.reached,
                                     f"{o.time_to_goal:.3f}",
                                     f"{o.min_clearance:.4f}", o.collisions])
                print(f"map{idx} {kind}: reached={o.reached} "
                      f"t={o.time_to_goal:.2f}s collisions={o.collisions}")

    out = _out_dir(args)
    fileio.write_csv(out / "bench_timing.csv", fileio.BENCH_TIMING_HEADER,
                     timing_rows)
    if episode_rows:
        fileio.write_csv(out / "bench_episodes.csv",
                         fileio.BENCH_EPISODE_HEADER, episode_rows)
    print(f"bench artifacts in {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellid",
        description="Ellipsoid-based obstacle identification, tracking, "
                    "and avoidance")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="ellid_out", help="artifact directory")
        p.add_argument("--svg", action="store_true", help="emit SVG renders")

    p = sub.add_parser("identify", help="fit ellipses to a points file")
    p.add_argument("points_file")
    common(p)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("track", help="track ellipses across frame files")
    p.add_argument("frames_dir")
    common(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("run", help="run a closed-loop scenario episode")
    p.add_argument("scenario", help="scenario JSON path or map1..map5")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="timing and planner comparison")
    common(p)
    p.add_argument("--reps", type=int, default=20,
                   help="identification timing repetitions")
    p.add_argument("--maps", default=None, help="comma-separated map numbers")
    p.add_argument("--skip-episodes", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("ELLID_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
