"""Ground-truth annotators: scene narration, sign reports, critical objects."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..config import AnnotateConfig
from ..sim.geometry import wrap_angle
from ..sim.types import WorldState


class OffMapError(ValueError):
    """Ego cannot be projected onto any lane."""


@dataclass
class CandidateRoute:
    maneuver: str
    target_lane: str


@dataclass
class SceneNarration:
    scene_kind: str           # straight_road | intersection | junction_approach | merge_zone
    lane_count: int
    current_lane: str
    candidates: list

    def to_dict(self):
        return {"scene_kind": self.scene_kind, "lane_count": self.lane_count,
                "current_lane": self.current_lane,
                "candidates": [asdict(c) for c in self.candidates]}

    @classmethod
    def from_dict(cls, d):
        return cls(scene_kind=d["scene_kind"], lane_count=d["lane_count"],
                   current_lane=d["current_lane"],
                   candidates=[CandidateRoute(**c) for c in d["candidates"]])


@dataclass
class SignEntry:
    sign_kind: str            # traffic_light | warning | construction
    state: str | None         # red | yellow | green, lights only
    distance: float


@dataclass
class SignReport:
    entries: list

    def to_dict(self):
        return {"entries": [asdict(e) for e in self.entries]}

    @classmethod
    def from_dict(cls, d):
        return cls(entries=[SignEntry(**e) for e in d["entries"]])


@dataclass
class CriticalObject:
    agent_id: int
    kind: str
    longitudinal: float
    lateral: float
    speed: float
    interaction: str          # yield_to | follow | overtake | avoid | ignore_after_clear


@dataclass
class CriticalObjectReport:
    entries: list

    def to_dict(self):
        return {"entries": [asdict(e) for e in self.entries]}

    @classmethod
    def from_dict(cls, d):
        return cls(entries=[CriticalObject(**e) for e in d["entries"]])


def signed_projection(polyline, x, y):
    """(arc_s, signed lateral) with positive lateral to the left of travel."""
    s, dist = polyline.project(x, y)
    px, py = polyline.point_at(s)
    tangent = polyline.heading_at(s)
    cross = math.cos(tangent) * (y - py) - math.sin(tangent) * (x - px)
    return s, math.copysign(dist, cross) if dist > 0 else 0.0


def _linked_lane_count(graph, lane_id: str) -> int:
    seen = {lane_id}
    for direction in ("left", "right"):
        cur = lane_id
        while True:
            nxt = getattr(graph[cur], direction)
            if nxt is None or nxt in seen:
                break
            seen.add(nxt)
            cur = nxt
    return len(seen)


def describe_scene(world: WorldState, cfg: AnnotateConfig | None = None) -> SceneNarration:
    """Classify the driving context ahead and enumerate feasible maneuvers."""
    graph = world.lane_graph
    route = world.route
    lane, _, dist = graph.nearest_lane(world.ego.x, world.ego.y)
    if dist > lane.width / 2.0 + 1.5:
        raise OffMapError(f"ego {dist:.2f} m from the nearest lane centerline")

    s_ego, _ = route.polyline.project(world.ego.x, world.ego.y)
    kinds_at = []
    s = s_ego
    while s <= s_ego + 60.0:
        px, py = route.polyline.point_at(s)
        near = graph.nearest_lane(px, py)[0]
        kinds_at.append((s - s_ego, near.kind))
        s += 3.0
    junction_within_30 = any(k == "junction" for d, k in kinds_at if d <= 30.0)
    junction_within_60 = any(k == "junction" for _, k in kinds_at)
    change_within_30 = any(
        route.command_at(s_ego + d) in ("change_left", "change_right")
        for d, _ in kinds_at if d <= 30.0)

    if junction_within_30:
        scene_kind = "intersection"
    elif junction_within_60:
        scene_kind = "junction_approach"
    elif change_within_30:
        scene_kind = "merge_zone"
    else:
        scene_kind = "straight_road"

    candidates = [CandidateRoute("lane_follow", lane.id)]
    if lane.left is not None:
        candidates.append(CandidateRoute("lane_change_left", lane.left))
    if lane.right is not None:
        candidates.append(CandidateRoute("lane_change_right", lane.right))
    for succ in lane.successors:
        succ_lane = graph[succ]
        d_head = wrap_angle(succ_lane.centerline.heading_at(succ_lane.centerline.length)
                            - lane.centerline.heading_at(lane.centerline.length))
        if d_head > math.radians(30.0):
            candidates.append(CandidateRoute("turn_left", succ))
        elif d_head < -math.radians(30.0):
            candidates.append(CandidateRoute("turn_right", succ))
        else:
            candidates.append(CandidateRoute("straight", succ))

    return SceneNarration(scene_kind=scene_kind,
                          lane_count=_linked_lane_count(graph, lane.id),
                          current_lane=lane.id, candidates=candidates)


def report_signs(world: WorldState, cfg: AnnotateConfig | None = None) -> SignReport:
    """Lights and roadside signs governing the route within sensing range."""
    cfg = cfg or AnnotateConfig()
    route = world.route
    s_ego, _ = route.polyline.project(world.ego.x, world.ego.y)
    entries = []
    for li, light in enumerate(world.scenario.lights):
        if not any(lid in route.lane_ids for lid in light.governs):
            continue
        x1, y1, x2, y2 = light.stop_line
        s_stop, _ = route.polyline.project((x1 + x2) / 2.0, (y1 + y2) / 2.0)
        d = s_stop - s_ego
        if 0.0 <= d <= cfg.sign_range:
            entries.append(SignEntry(sign_kind="traffic_light",
                                     state=world.light_states[li], distance=d))
    for sign in world.scenario.signs:
        s_sign, lat = route.polyline.project(sign.x, sign.y)
        if lat > 6.0:
            continue
        d = s_sign - s_ego
        if 0.0 <= d <= cfg.sign_range:
            entries.append(SignEntry(sign_kind=sign.kind, state=None, distance=d))
    entries.sort(key=lambda e: e.distance)
    return SignReport(entries=entries)


def identify_critical_objects(world: WorldState,
                              cfg: AnnotateConfig | None = None) -> CriticalObjectReport:
    """Tag agents in interactive lanes with the interaction they force."""
    cfg = cfg or AnnotateConfig()
    route = world.route
    ego = world.ego
    s_ego, _ = route.polyline.project(ego.x, ego.y)
    pending_change = [z for z in route.blend_zones if -5.0 < z[0] - s_ego < 45.0]
    entries = []
    for ag in world.agents:
        s_a, lat = signed_projection(route.polyline, ag.x, ag.y)
        lon = s_a - s_ego
        if lon < -10.0 or lon > cfg.object_range:
            continue
        tangent = route.polyline.heading_at(s_a)
        rel_heading = wrap_angle(ag.heading - tangent)
        in_corridor = abs(lat) <= 2.6
        interaction = None

        if ag.kind == "pedestrian":
            px, py = route.polyline.point_at(s_a)
            to_route = math.atan2(py - ag.y, px - ag.x)
            approaching = ag.speed > 0.2 and abs(wrap_angle(ag.heading - to_route)) < math.pi / 3
            receding = ag.speed > 0.2 and not approaching
            if lon > 0 and (in_corridor or approaching) and abs(lat) <= 8.0:
                interaction = "yield_to"
            elif abs(lat) <= 8.0 and receding:
                interaction = "ignore_after_clear"
        elif in_corridor and ag.speed < 0.3:
            if lon > 0:
                interaction = "avoid"
        elif in_corridor and abs(rel_heading) < math.pi / 3:
            headway = lon / max(ego.v, 0.1)
            if lon > 0 and (headway < cfg.headway_s or lon < 15.0):
                interaction = "follow"
        elif abs(rel_heading) >= math.pi / 3 and ag.speed > 0.3 and abs(lat) <= 25.0:
            px, py = route.polyline.point_at(s_a)
            to_route = math.atan2(py - ag.y, px - ag.x)
            closing = ag.speed * math.cos(wrap_angle(ag.heading - to_route))
            if in_corridor or closing > 0.2:
                if lon > 0:
                    interaction = "yield_to"
            elif abs(lat) <= 8.0:
                interaction = "ignore_after_clear"

        if interaction is None and pending_change and ag.kind != "pedestrian":
            zone = pending_change[0]
            lane = world.lane_graph[zone[2]]
            _, lane_lat = lane.centerline.project(ag.x, ag.y)
            if lane_lat <= 2.0 and ag.speed > 0.3:
                oncoming = abs(rel_heading) > 2.0 * math.pi / 3.0
                interaction = "yield_to" if oncoming else "follow"

        if interaction is not None:
            entries.append(CriticalObject(agent_id=ag.id, kind=ag.kind,
                                          longitudinal=lon, lateral=lat,
                                          speed=ag.speed, interaction=interaction))
    entries.sort(key=lambda e: e.longitudinal)
    return CriticalObjectReport(entries=entries[:8])
