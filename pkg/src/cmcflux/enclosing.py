"""Smallest enclosing circle of planar points."""

from __future__ import annotations

import itertools
import math
import random
from typing import NamedTuple, Sequence


class Circle(NamedTuple):
    cx: float
    cy: float
    r: float

    def contains(self, p, eps: float = 1e-12) -> bool:
        return math.hypot(p[0] - self.cx, p[1] - self.cy) <= self.r * (1 + eps) + eps


def _from_two(a, b) -> Circle:
    cx, cy = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
    return Circle(cx, cy, math.hypot(a[0] - cx, a[1] - cy))


def _from_three(a, b, c) -> Circle | None:
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-300:
        return None
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    return Circle(ux, uy, max(math.hypot(ax - ux, ay - uy), math.hypot(bx - ux, by - uy), math.hypot(cx - ux, cy - uy)))


def smallest_enclosing_circle(points: Sequence[Sequence[float]], seed: int = 0) -> Circle:
    """Welzl's incremental algorithm with a fixed shuffle for determinism."""
    pts = [(float(p[0]), float(p[1])) for p in points]
    if not pts:
        raise ValueError("need at least one point")
    random.Random(seed).shuffle(pts)
    c = Circle(pts[0][0], pts[0][1], 0.0)
    for i, p in enumerate(pts):
        if c.contains(p):
            continue
        c = Circle(p[0], p[1], 0.0)
        for j in range(i):
            q = pts[j]
            if c.contains(q):
                continue
            c = _from_two(p, q)
            for k in range(j):
                s = pts[k]
                if c.contains(s):
                    continue
                c = _from_three(p, q, s) or c
    return c


def brute_force_enclosing_circle(points: Sequence[Sequence[float]]) -> Circle:
    """Check every two- and three-point support set; O(n^4), for small inputs."""
    pts = [(float(p[0]), float(p[1])) for p in points]
    if len(pts) == 1:
        return Circle(pts[0][0], pts[0][1], 0.0)
    best = None
    cands = [_from_two(a, b) for a, b in itertools.combinations(pts, 2)]
    cands += [c for t in itertools.combinations(pts, 3) if (c := _from_three(*t)) is not None]
    for c in cands:
        if (best is None or c.r < best.r) and all(c.contains(p, 1e-9) for p in pts):
            best = c
    return best
