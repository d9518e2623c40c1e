"""Plain-text point files, frame directories, and CSV artifact writers."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class PointFileError(ValueError):
    """Raised with a line-numbered message when a points file is malformed."""


def read_points_file(path) -> np.ndarray:
    """Parse one 'x y' pair per nonempty line, meters."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = text.split()
            if len(fields) != 2:
                raise PointFileError(
                    f"{path}:{lineno}: expected 'x y', got {text!r}")
            try:
                rows.append((float(fields[0]), float(fields[1])))
            except ValueError:
                raise PointFileError(
                    f"{path}:{lineno}: non-numeric coordinate in {text!r}") from None
    return np.array(rows, dtype=float).reshape(-1, 2)


def write_points_file(path, points) -> None:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in pts:
            fh.write(f"{x:.9g} {y:.9g}\n")


def read_frames_dir(path) -> list[tuple[float, np.ndarray]]:
    """Read a directory of point files named by millisecond timestamp.

    Returns (time_seconds, points) sorted by time.
    """
    frames = []
    directory = Path(path)
    for entry in sorted(directory.iterdir()):
        if entry.is_dir():
            continue
        stem = entry.stem
        try:
            millis = int(stem)
        except ValueError:
            raise PointFileError(
                f"{entry}: frame files must be named by millisecond timestamp")
        frames.append((millis / 1e3, read_points_file(entry)))
    frames.sort(key=lambda item: item[0])
    return frames


ELLIPSES_HEADER = ["index", "xc_x", "xc_y", "r1", "r2", "theta", "cluster_size"]
TRACKS_HEADER = ["time", "track_id", "xc_x", "xc_y", "r1", "r2", "theta",
                 "vx", "vy", "omega", "cov_trace"]
EPISODE_HEADER = ["frame", "time", "n_points", "n_ellipses", "n_tracks",
                  "px", "py", "vx", "vy", "u_fx", "u_fy", "clearance",
                  "identification_ms", "planning_ms"]
BENCH_TIMING_HEADER = ["map", "n_points", "repetitions", "median_ms", "p95_ms"]
BENCH_EPISODE_HEADER = ["map", "pipeline", "reached", "time_to_goal",
                        "min_clearance", "collisions"]


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def ellipse_rows(ellipses, sizes) -> list[list]:
    return [
        [i, f"{e.xc[0]:.6f}", f"{e.xc[1]:.6f}", f"{e.r1:.6f}", f"{e.r2:.6f}",
         f"{e.theta:.6f}", int(size)]
        for i, (e, size) in enumerate(zip(ellipses, sizes))
    ]


def track_rows(t: float, tracks) -> list[list]:
    rows = []
    for trk in tracks:
        rows.append([
            f"{t:.3f}", trk.id, f"{trk.state[0]:.6f}", f"{trk.state[1]:.6f}",
            f"{trk.shape[0]:.6f}", f"{trk.shape[1]:.6f}", f"{trk.state[2]:.6f}",
            f"{trk.state[3]:.6f}", f"{trk.state[4]:.6f}", f"{trk.state[5]:.6f}",
            f"{float(np.trace(trk.covariance)):.6f}",
        ])
    return rows


def episode_rows(log) -> list[list]:
    rows = []
    for i, frame in enumerate(log.frames):
        u0 = frame.mpc.controls[0]
        rows.append([
            i, f"{frame.time:.3f}", len(frame.points), len(frame.ellipses),
            len(frame.tracks), f"{frame.vehicle.px:.6f}",
            f"{frame.vehicle.py:.6f}", f"{frame.vehicle.vx:.6f}",
            f"{frame.vehicle.vy:.6f}", f"{u0[0]:.6f}", f"{u0[1]:.6f}",
            f"{frame.clearance:.6f}", f"{frame.identification_ms:.3f}",
            f"{frame.planning_ms:.3f}",
        ])
    return rows
