import math

import numpy as np
import pytest

from reasonplan.sim.geometry import (
    Polyline,
    obb_overlap,
    point_in_obb,
    point_segment_distance,
    segment_obb_intersect,
    segments_intersect,
    wrap_angle,
)


def test_wrap_angle_range():
    for a in np.linspace(-12.0, 12.0, 101):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert abs(math.sin(w) - math.sin(a)) < 1e-12
        assert abs(math.cos(w) - math.cos(a)) < 1e-12


def test_obb_overlap_basic():
    a = (0.0, 0.0, 0.0, 2.0, 1.0)
    assert obb_overlap(a, (3.9, 0.0, 0.0, 2.0, 1.0))
    assert not obb_overlap(a, (4.2, 0.0, 0.0, 2.0, 1.0))
    # rotated box slipping diagonally past the corner
    assert not obb_overlap(a, (3.0, 2.2, math.pi / 4, 1.0, 0.2))
    assert obb_overlap(a, (0.0, 0.0, 1.0, 0.1, 0.1))


def test_obb_overlap_matches_sampling_oracle():
    rng = np.random.default_rng(7)
    for _ in range(60):
        a = (rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-3, 3),
             rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0))
        b = (rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-3, 3),
             rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0))
        # dense point sampling of box b as a one-sided overlap witness
        ts = np.linspace(-1, 1, 21)
        c, s = math.cos(b[2]), math.sin(b[2])
        witness = False
        for u in ts:
            for w in ts:
                px = b[0] + c * u * b[3] - s * w * b[4]
                py = b[1] + s * u * b[3] + c * w * b[4]
                if point_in_obb(px, py, *a):
                    witness = True
        if witness:
            assert obb_overlap(a, b)


def test_point_segment_distance():
    assert point_segment_distance(0, 1, -1, 0, 1, 0) == pytest.approx(1.0)
    assert point_segment_distance(5, 0, -1, 0, 1, 0) == pytest.approx(4.0)
    assert point_segment_distance(3, 4, 0, 0, 0, 0) == pytest.approx(5.0)


def test_segments_intersect():
    assert segments_intersect((0, 0), (2, 2), (0, 2), (2, 0))
    assert not segments_intersect((0, 0), (1, 0), (0, 1), (1, 1))
    assert segments_intersect((0, 0), (2, 0), (1, 0), (1, 5))  # touching


def test_segment_obb_intersect():
    box = (5.0, 0.0, 0.0, 1.0, 1.0)
    assert segment_obb_intersect(0, 0, 10, 0, *box)
    assert not segment_obb_intersect(0, 3, 10, 3, *box)
    assert not segment_obb_intersect(0, 0, 3.5, 0, *box)  # stops short
    assert segment_obb_intersect(4.5, 0.5, 5.5, -0.5, *box)  # fully inside too


def test_polyline_projection_against_dense_oracle():
    pts = [(0, 0), (10, 0), (10, 8), (25, 8)]
    pl = Polyline(pts)
    rng = np.random.default_rng(3)
    # oracle: dense sampling of the polyline
    dense = []
    for i in range(len(pts) - 1):
        a, b = np.array(pts[i], float), np.array(pts[i + 1], float)
        for t in np.linspace(0, 1, 2001):
            dense.append((pl.cum[i] + t * pl.seg_len[i], a + t * (b - a)))
    for _ in range(25):
        px, py = rng.uniform(-5, 30), rng.uniform(-5, 15)
        s, d = pl.project(px, py)
        ds = [math.hypot(px - p[0], py - p[1]) for _, p in dense]
        k = int(np.argmin(ds))
        assert d == pytest.approx(ds[k], abs=2e-2)
        assert s == pytest.approx(dense[k][0], abs=3e-2)


def test_polyline_point_and_heading():
    pl = Polyline([(0, 0), (10, 0), (10, 10)])
    assert pl.point_at(5.0) == pytest.approx((5.0, 0.0))
    assert pl.point_at(15.0) == pytest.approx((10.0, 5.0))
    assert pl.heading_at(2.0) == pytest.approx(0.0)
    assert pl.heading_at(12.0) == pytest.approx(math.pi / 2)
    assert pl.length == pytest.approx(20.0)
