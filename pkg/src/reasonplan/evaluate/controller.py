"""Waypoint-tracking controller: pure-pursuit steering + proportional speed."""

from __future__ import annotations

import math

from ..config import SimConfig

SPEED_KP = 2.0
FALLBACK_DECEL = -2.0


def track(ego, waypoints, cfg: SimConfig | None = None):
    """(accel, steer) toward 4 ego-frame waypoints at 0.5 s spacing."""
    cfg = cfg or SimConfig()
    if len(waypoints) != 4:
        raise ValueError("track expects 4 waypoints")
    dists = [math.hypot(x, y) for x, y in waypoints]

    if dists[-1] < 0.5:
        return cfg.accel_min, 0.0  # stop intent: all points at the origin

    lookahead = min(max(0.5 + 0.9 * ego.v, 2.5), 10.0)
    tx, ty = waypoints[-1]
    for (x, y), d in zip(waypoints, dists):
        if d >= lookahead:
            tx, ty = x, y
            break
    d2 = tx * tx + ty * ty
    curvature = 0.0 if d2 < 1e-9 else 2.0 * ty / d2
    steer = math.atan(curvature * cfg.wheelbase)
    steer = min(max(steer, -cfg.steer_max), cfg.steer_max)

    # implied speed: the second waypoint sits 1.0 s ahead
    v_des = dists[1] / 1.0
    accel = SPEED_KP * (v_des - ego.v)
    accel = min(max(accel, cfg.accel_min), cfg.accel_max)
    return accel, steer
