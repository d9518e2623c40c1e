"""Regenerate the canonical map fixtures under src/ellid/maps/.

Geometry is chosen so the straight start-goal line is blocked and the
caption point totals are hit exactly; densities are solved from the
outline perimeters.
"""

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "ellid" / "maps"


def rect(w, h):
    return [[-w / 2, -h / 2], [w / 2, -h / 2], [w / 2, h / 2], [-w / 2, h / 2]]


def plus_shape(half_len_x, half_len_y, half_width):
    l, v, w = half_len_x, half_len_y, half_width
    return [
        [l, w], [w, w], [w, v], [-w, v], [-w, w], [-l, w],
        [-l, -w], [-w, -w], [-w, -v], [w, -v], [w, -w], [l, -w],
    ]


def perimeter(outline):
    pts = np.asarray(outline, dtype=float)
    closed = np.vstack([pts, pts[:1]])
    return float(np.linalg.norm(np.diff(closed, axis=0), axis=1).sum())


def obstacle(outline, position, orientation=0.0, velocity=(0.0, 0.0), omega=0.0):
    return {
        "outline": outline,
        "position": list(position),
        "orientation": orientation,
        "velocity": list(velocity),
        "omega": omega,
    }


def scenario(name, obstacles, start, goal, target_points, duration,
             noise=0.01, dt=0.1, seed=0):
    total = sum(perimeter(ob["outline"]) for ob in obstacles)
    density = target_points / total
    assert round(density * total) == target_points
    return {
        "name": name,
        "obstacles": obstacles,
        "vehicle_start": [start[0], start[1], 0.0, 0.0],
        "goal": list(goal),
        "density": density,
        "noise": noise,
        "dt": dt,
        "duration": duration,
        "seed": seed,
    }


HALF_PI = float(np.pi / 2)

MAP1 = scenario(
    "map1",
    [
        obstacle(rect(2.6, 1.4), (0.0, 0.0), orientation=0.5),
        obstacle(rect(2.4, 1.3), (-4.5, 2.5), orientation=1.2),
        obstacle(rect(2.2, 1.4), (4.5, 2.5), orientation=2.0),
        obstacle(rect(2.4, 1.2), (-4.0, -4.5), orientation=0.3),
        obstacle(rect(2.0, 1.2), (4.5, -3.0), orientation=2.6),
        obstacle(rect(2.6, 1.2), (-1.0, 5.0), orientation=1.8),
    ],
    start=(-6.0, -6.0), goal=(6.0, 6.0), target_points=520, duration=6.0,
)

MAP2 = scenario(
    "map2",
    [obstacle(plus_shape(2.4, 1.6, 0.5), (0.0, 0.0),
              velocity=(5.0, 2.0), omega=HALF_PI)],
    start=(-10.0, -8.0), goal=(-9.0, -8.0), target_points=214, duration=2.5,
)

MAP3 = scenario(
    "map3",
    [
        obstacle(rect(2.0, 2.0), (6.0, 0.9), velocity=(-5.0, 0.0)),
        obstacle(rect(2.0, 2.0), (6.0, -2.9), velocity=(-5.0, 0.0)),
    ],
    start=(-8.0, 0.0), goal=(8.0, 0.0), target_points=248, duration=8.0,
)

MAP4 = scenario(
    "map4",
    [
        obstacle(rect(14.0, 0.6), (0.0, 3.5)),
        obstacle(rect(14.0, 0.6), (0.0, -3.5)),
        obstacle(rect(3.6, 0.8), (0.0, 0.0), omega=HALF_PI),
    ],
    start=(-8.0, 0.0), goal=(8.0, 0.0), target_points=908, duration=8.0,
)

MAP5 = scenario(
    "map5",
    [
        obstacle(rect(20.0, 0.5), (0.0, 10.0)),
        obstacle(rect(20.0, 0.5), (0.0, -10.0)),
        obstacle(rect(0.5, 20.0), (10.0, 0.0)),
        obstacle(rect(0.5, 20.0), (-10.0, 0.0)),
        obstacle(rect(3.0, 0.6), (-4.0, -4.0), omega=HALF_PI),
        obstacle(rect(3.0, 0.6), (4.0, -4.0), omega=HALF_PI),
        obstacle(rect(3.0, 0.6), (-4.0, 4.0), omega=HALF_PI),
        obstacle(rect(3.0, 0.6), (4.0, 4.0), omega=HALF_PI),
    ],
    start=(-8.0, -8.0), goal=(8.0, 8.0), target_points=2418, duration=10.0,
)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for i, m in enumerate([MAP1, MAP2, MAP3, MAP4, MAP5], start=1):
        path = OUT / f"map{i}.json"
        path.write_text(json.dumps(m, indent=1))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
