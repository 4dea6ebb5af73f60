"""Polyline routes parameterized by arc length."""

from __future__ import annotations

import bisect
import math
from typing import Sequence


class Polyline:
    """An open 2D polyline with arc-length lookup and projection.

    Positions are interpolated linearly inside each segment, so the point
    returned by :meth:`point_at` lies on the polyline up to float rounding.
    """

    __slots__ = ("points", "cumulative", "length")

    def __init__(self, points: Sequence[Sequence[float]]):
        pts = tuple((float(x), float(y)) for x, y in points)
        if len(pts) < 2:
            raise ValueError("a route needs at least two waypoints")
        cumulative = [0.0]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            seg = math.hypot(x1 - x0, y1 - y0)
            if (x1 - x0) ** 2 + (y1 - y0) ** 2 == 0.0:
                raise ValueError(f"repeated or degenerate waypoint {(x0, y0)}")
            cumulative.append(cumulative[-1] + seg)
        self.points = pts
        self.cumulative = tuple(cumulative)
        self.length = cumulative[-1]

    def _segment(self, s: float) -> int:
        # index i of the segment [cum[i], cum[i+1]] containing s; vertices belong
        # to the segment that starts there, except the final one
        i = bisect.bisect_right(self.cumulative, s) - 1
        return min(max(i, 0), len(self.points) - 2)

    def point_at(self, s: float) -> tuple[float, float, float]:
        """Return ``(x, y, heading)`` at arc length ``s`` (clamped to the route)."""
        s = min(max(s, 0.0), self.length)
        i = self._segment(s)
        (x0, y0), (x1, y1) = self.points[i], self.points[i + 1]
        seg = self.cumulative[i + 1] - self.cumulative[i]
        u = (s - self.cumulative[i]) / seg
        heading = math.atan2(y1 - y0, x1 - x0)
        if heading == -math.pi:
            heading = math.pi
        return x0 + u * (x1 - x0), y0 + u * (y1 - y0), heading

    def project(self, x: float, y: float) -> tuple[float, float]:
        """Closest point on the polyline to ``(x, y)``.

        Returns ``(arc_length, lateral)`` where ``lateral`` is the unsigned
        distance to the polyline. Ties go to the earliest segment.
        """
        best_s, best_d2 = 0.0, math.inf
        for i in range(len(self.points) - 1):
            (x0, y0), (x1, y1) = self.points[i], self.points[i + 1]
            dx, dy = x1 - x0, y1 - y0
            seg2 = dx * dx + dy * dy
            u = ((x - x0) * dx + (y - y0) * dy) / seg2
            u = min(max(u, 0.0), 1.0)
            px, py = x0 + u * dx, y0 + u * dy
            d2 = (x - px) ** 2 + (y - py) ** 2
            if d2 < best_d2:
                best_d2 = d2
                best_s = self.cumulative[i] + u * math.sqrt(seg2)
        return best_s, math.sqrt(best_d2)

    def __repr__(self) -> str:
        return f"Polyline({list(self.points)!r})"
