"""2D geometry primitives shared by the simulator, renderer, and annotators."""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, TWO_PI)
    if a <= 0.0:
        a += TWO_PI
    return a - math.pi


def obb_corners(cx, cy, heading, hx, hy) -> np.ndarray:
    c, s = math.cos(heading), math.sin(heading)
    local = np.array([[hx, hy], [hx, -hy], [-hx, -hy], [-hx, hy]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([cx, cy])


def obb_overlap(a, b) -> bool:
    """Separating-axis test for two oriented boxes (cx, cy, heading, hx, hy)."""
    ca = obb_corners(*a)
    cb = obb_corners(*b)
    for corners, heading in ((ca, a[2]), (cb, b[2])):
        del corners
        c, s = math.cos(heading), math.sin(heading)
        for axis in ((c, s), (-s, c)):
            pa = ca @ axis
            pb = cb @ axis
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def point_in_obb(px, py, cx, cy, heading, hx, hy) -> bool:
    c, s = math.cos(heading), math.sin(heading)
    dx, dy = px - cx, py - cy
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    return abs(lx) <= hx and abs(ly) <= hy


def point_segment_distance(px, py, x1, y1, x2, y2) -> float:
    dx, dy = x2 - x1, y2 - y1
    len2 = dx * dx + dy * dy
    if len2 <= 0.0:
        return math.hypot(px - x1, py - y1)
    t = ((px - x1) * dx + (py - y1) * dy) / len2
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))


def segments_intersect(p1, p2, p3, p4) -> bool:
    """Proper or touching intersection of segments p1-p2 and p3-p4."""
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    if d1 == 0 and on_seg(p3, p4, p1):
        return True
    if d2 == 0 and on_seg(p3, p4, p2):
        return True
    if d3 == 0 and on_seg(p1, p2, p3):
        return True
    if d4 == 0 and on_seg(p1, p2, p4):
        return True
    return False


def segment_obb_intersect(x1, y1, x2, y2, cx, cy, heading, hx, hy) -> bool:
    """Slab test for segment vs oriented box, in the box frame."""
    c, s = math.cos(heading), math.sin(heading)
    ox = c * (x1 - cx) + s * (y1 - cy)
    oy = -s * (x1 - cx) + c * (y1 - cy)
    ex = c * (x2 - cx) + s * (y2 - cy)
    ey = -s * (x2 - cx) + c * (y2 - cy)
    dx, dy = ex - ox, ey - oy
    t0, t1 = 0.0, 1.0
    for o, d, h in ((ox, dx, hx), (oy, dy, hy)):
        if d == 0.0:
            if abs(o) > h:
                return False
        else:
            ta = (-h - o) / d
            tb = (h - o) / d
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
            if t0 > t1:
                return False
    return True


class Polyline:
    """A polyline with cached cumulative arc length and projection helpers."""

    def __init__(self, points):
        self.pts = np.asarray(points, dtype=np.float64)
        if self.pts.ndim != 2 or len(self.pts) < 2:
            raise ValueError("polyline needs >= 2 points")
        seg = np.diff(self.pts, axis=0)
        self.seg_len = np.hypot(seg[:, 0], seg[:, 1])
        self.cum = np.concatenate([[0.0], np.cumsum(self.seg_len)])

    @property
    def length(self) -> float:
        return float(self.cum[-1])

    def project(self, px, py):
        """Return (arc_length, distance) of the closest point to (px, py)."""
        best_s, best_d = 0.0, math.inf
        for i in range(len(self.pts) - 1):
            x1, y1 = self.pts[i]
            x2, y2 = self.pts[i + 1]
            dx, dy = x2 - x1, y2 - y1
            len2 = dx * dx + dy * dy
            t = 0.0 if len2 <= 0.0 else min(1.0, max(0.0, ((px - x1) * dx + (py - y1) * dy) / len2))
            d = math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))
            if d < best_d:
                best_d = d
                best_s = self.cum[i] + t * self.seg_len[i]
        return best_s, best_d

    def point_at(self, s: float):
        """World point at arc length s (clamped to the polyline)."""
        s = min(max(s, 0.0), self.length)
        i = int(np.searchsorted(self.cum, s, side="right")) - 1
        i = min(max(i, 0), len(self.seg_len) - 1)
        if self.seg_len[i] <= 0.0:
            return tuple(self.pts[i])
        t = (s - self.cum[i]) / self.seg_len[i]
        p = self.pts[i] + t * (self.pts[i + 1] - self.pts[i])
        return float(p[0]), float(p[1])

    def heading_at(self, s: float) -> float:
        s = min(max(s, 0.0), self.length)
        i = int(np.searchsorted(self.cum, s, side="right")) - 1
        i = min(max(i, 0), len(self.seg_len) - 1)
        dx, dy = self.pts[i + 1] - self.pts[i]
        return math.atan2(dy, dx)
