"""Meta-action labels from expert rollout segments.

Longitudinal labels come from the smoothed mean acceleration over the window;
lateral labels from centerline-offset migration and heading change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..config import AnnotateConfig
from ..sim.geometry import wrap_angle
from .reports import signed_projection

LATERAL_ACTIONS = ("lane_follow", "lane_change_left", "lane_change_right",
                   "turn_left", "turn_right", "straight")
LONGITUDINAL_ACTIONS = ("accelerate", "decelerate", "stop", "emergency_brake", "keep")


@dataclass(frozen=True)
class MetaAction:
    lateral: str
    longitudinal: str

    def __post_init__(self):
        if self.lateral not in LATERAL_ACTIONS:
            raise ValueError(f"bad lateral action {self.lateral!r}")
        if self.longitudinal not in LONGITUDINAL_ACTIONS:
            raise ValueError(f"bad longitudinal action {self.longitudinal!r}")

    def to_dict(self):
        return {"lateral": self.lateral, "longitudinal": self.longitudinal}


def low_pass(signal, alpha: float):
    """Exponential smoothing: y[0]=x[0], y[k] = alpha*x[k] + (1-alpha)*y[k-1]."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    signal = list(signal)
    if not signal:
        raise ValueError("empty signal")
    out = [float(signal[0])]
    for x in signal[1:]:
        out.append(alpha * float(x) + (1.0 - alpha) * out[-1])
    return out


def derive_meta_actions(segment, cfg: AnnotateConfig | None = None) -> MetaAction:
    """Label one expert segment (list of WorldState spanning the meta window)."""
    cfg = cfg or AnnotateConfig()
    if len(segment) < 2:
        raise ValueError("segment shorter than the labeling window")
    start, end = segment[0], segment[-1]

    accel = low_pass([w.ego.a for w in segment], cfg.smoothing_alpha)
    a_bar = sum(accel) / len(accel)
    end_speed = end.ego.v
    if a_bar > cfg.accel_threshold:
        longitudinal = "accelerate"
    elif a_bar < cfg.emergency_threshold:
        longitudinal = "emergency_brake"
    elif a_bar < -cfg.accel_threshold:
        longitudinal = "decelerate"
    elif end_speed < cfg.stop_speed:
        longitudinal = "stop"
    else:
        longitudinal = "keep"

    graph = start.lane_graph
    lane0 = graph.nearest_lane(start.ego.x, start.ego.y)[0]
    _, off_end = signed_projection(lane0.centerline, end.ego.x, end.ego.y)
    end_lane = graph.nearest_lane(end.ego.x, end.ego.y)[0]
    in_junction = any(
        graph.nearest_lane(w.ego.x, w.ego.y)[0].kind == "junction" for w in segment)

    lateral = "lane_follow"
    if abs(off_end) > lane0.width / 2.0 and end_lane.id != lane0.id:
        lateral = "lane_change_left" if off_end > 0 else "lane_change_right"
    elif in_junction:
        d_heading = wrap_angle(end.ego.heading - start.ego.heading)
        if abs(d_heading) > math.radians(cfg.turn_heading_deg):
            lateral = "turn_left" if d_heading > 0 else "turn_right"
        else:
            lateral = "straight"
    return MetaAction(lateral=lateral, longitudinal=longitudinal)
