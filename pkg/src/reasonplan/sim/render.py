"""Six-view pseudo-camera rendering from ground truth.

Each view is a semantic class raster in the camera frame (x forward, y left),
with 2D ray-cast occlusion against opaque agent boxes standing in for what a
real camera could not see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..config import SimConfig
from .types import (
    CAMERA_NAMES,
    CAMERA_YAWS,
    CLS_GREEN,
    CLS_PEDESTRIAN,
    CLS_RED,
    CLS_STATIC,
    CLS_VEHICLE,
    CLS_YELLOW,
    WorldState,
)

_LIGHT_CLASS = {"red": CLS_RED, "yellow": CLS_YELLOW, "green": CLS_GREEN}
_AGENT_CLASS = {"vehicle": CLS_VEHICLE, "pedestrian": CLS_PEDESTRIAN, "static": CLS_STATIC}


@dataclass(frozen=True)
class PseudoFrame:
    camera: str
    raster: np.ndarray     # (H, W) uint8 class ids

    def __post_init__(self):
        if self.raster.dtype != np.uint8:
            raise ValueError("raster must be uint8")


def world_arrays(world: WorldState):
    """Pack lanes, route, lights, and agent boxes into kernel-ready arrays."""
    boxes = np.zeros((len(world.agents), 8), dtype=np.float64)
    for i, ag in enumerate(world.agents):
        opaque = 0.0 if ag.kind == "pedestrian" else 1.0
        boxes[i] = (ag.x, ag.y, math.cos(ag.heading), math.sin(ag.heading),
                    ag.hx, ag.hy, float(_AGENT_CLASS[ag.kind]), opaque)

    lane_rows = []
    for lane in world.lane_graph.lanes.values():
        pts = lane.centerline.pts
        half = lane.width / 2.0
        for a, b in zip(pts[:-1], pts[1:]):
            lane_rows.append((a[0], a[1], b[0], b[1], half))
    lane_segs = np.asarray(lane_rows, dtype=np.float64).reshape(-1, 5)

    pts = world.route.polyline.pts
    route_segs = np.asarray(
        [(a[0], a[1], b[0], b[1]) for a, b in zip(pts[:-1], pts[1:])],
        dtype=np.float64).reshape(-1, 4)

    light_rows = []
    for li, light in enumerate(world.scenario.lights):
        x1, y1, x2, y2 = light.stop_line
        light_rows.append((x1, y1, x2, y2, float(_LIGHT_CLASS[world.light_states[li]])))
    light_segs = np.asarray(light_rows, dtype=np.float64).reshape(-1, 5)
    return boxes, lane_segs, route_segs, light_segs


_bearing_cache: dict = {}


def bearing_tables(w: int, fov_deg: float):
    """Per-column bearing cos/sin across the FOV (column 0 leftmost)."""
    key = (w, fov_deg)
    if key not in _bearing_cache:
        fov = math.radians(fov_deg)
        angles = [fov / 2.0 - (j + 0.5) * (fov / w) for j in range(w)]
        _bearing_cache[key] = (
            np.array([math.cos(a) for a in angles]),
            np.array([math.sin(a) for a in angles]),
        )
    return _bearing_cache[key]


def render_pseudo_cameras(world: WorldState, cfg: SimConfig | None = None,
                          render_fn=None) -> list[PseudoFrame]:
    """Render the six fixed views; deterministic for a given world."""
    cfg = cfg or SimConfig()
    render_fn = render_fn or kernels.render_view
    boxes, lane_segs, route_segs, light_segs = world_arrays(world)
    bearing_cos, bearing_sin = bearing_tables(cfg.raster_w, cfg.camera_fov_deg)
    box_pad = 0.5 * cfg.camera_range / cfg.raster_h
    frames = []
    for name, yaw_off in zip(CAMERA_NAMES, CAMERA_YAWS):
        yaw = world.ego.heading + yaw_off
        raster = render_fn(
            cfg.raster_h, cfg.raster_w,
            world.ego.x, world.ego.y, math.cos(yaw), math.sin(yaw),
            bearing_cos, bearing_sin, cfg.camera_range, box_pad,
            boxes, lane_segs, route_segs, cfg.route_marker_halfwidth,
            light_segs, cfg.light_halfwidth,
        )
        frames.append(PseudoFrame(camera=name, raster=raster))
    return frames
