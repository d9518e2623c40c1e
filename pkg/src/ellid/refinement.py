"""Merging of over-segmented ellipse sets.

Two ellipses are merge candidates when their combined area nearly fills
the oriented bounding box of the pair; qualifying pairs are replaced by
the minimum-area ellipse covering both, and the scan repeats until no
pair qualifies. The covering ellipse is computed by running the
enclosing-ellipse fit over dense boundary samples of both inputs, which
for two ellipses in the plane is accurate to well under a percent at
the default sampling density.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import StandardEllipse, area, boundary_sample, general_to_standard, obb_of_pair
from .mvee import MveeConfig, khachiyan_mvee


@dataclass(frozen=True)
class RefinementConfig:
    ratio_threshold: float = 0.6  # merge when pair ratio reaches this
    union_samples: int = 64       # boundary samples per ellipse for the union fit
    max_passes: int = 10
    mvee: MveeConfig = field(default_factory=MveeConfig)

    def __post_init__(self):
        if not (0 < self.ratio_threshold <= 1):
            raise ValueError("ratio_threshold must lie in (0, 1]")
        if self.union_samples < 16:
            raise ValueError("union_samples must be at least 16")
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")


def volume_ratio(e1: StandardEllipse, e2: StandardEllipse) -> float:
    """Combined area of the pair over the area of their oriented box.

    Values near the disk-in-square packing bound (pi/2 for coincident
    disks) mean one ellipse describes the pair well; values near zero
    mean the pair is far apart.
    """
    box = obb_of_pair(e1, e2)
    return (area(e1) + area(e2)) / box.area()


def union_ellipse(e1: StandardEllipse, e2: StandardEllipse,
                  cfg: RefinementConfig = RefinementConfig()) -> StandardEllipse:
    """Minimum-area ellipse covering both inputs.

    Fit over pooled boundary samples, then rescaled so every sample lies
    inside exactly; the result therefore never has less area than either
    input (the optimal cover of one input's samples is that input).
    """
    pts = np.vstack([boundary_sample(e1, cfg.union_samples),
                     boundary_sample(e2, cfg.union_samples)])
    fit = khachiyan_mvee(pts, cfg.mvee)
    gen = fit.ellipse
    norms = np.linalg.norm(pts @ gen.A.T + gen.b, axis=1)
    worst = float(norms.max())
    if worst > 1.0:
        scaled = type(gen)(gen.A / worst, gen.b / worst)
        return general_to_standard(scaled)
    return general_to_standard(gen)


def refine(ellipses: list[StandardEllipse],
           cfg: RefinementConfig = RefinementConfig()) -> list[StandardEllipse]:
    """Merge qualifying pairs until the ellipse count stops changing.

    Within a pass the pair scan runs in (i, j), i < j index order,
    merges the first qualifying pair (replacing both with their union,
    appended at the end), and restarts; a pass with zero merges is the
    fixpoint. Each merge reduces the count by one, so termination is
    guaranteed well inside the pass bound.
    """
    current = list(ellipses)
    for _ in range(cfg.max_passes):
        merged_any = False
        restart = True
        while restart:
            restart = False
            n = len(current)
            for i in range(n):
                for k in range(i + 1, n):
                    if volume_ratio(current[i], current[k]) >= cfg.ratio_threshold:
                        union = union_ellipse(current[i], current[k], cfg)
                        current = [current[m] for m in range(n) if m not in (i, k)]
                        current.append(union)
                        merged_any = True
                        restart = True
                        break
                if restart:
                    break
        if not merged_any:
            break
    return current
