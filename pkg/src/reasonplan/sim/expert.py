"""Rule-based expert: pure-pursuit steering plus IDM-style speed control with
stop constraints for lights, crossing agents, and lane-change gap acceptance.

Reads ground truth, so it is deliberately conservative: the zero-infraction
contract on the whole scenario library is what the dataset quality rests on.
"""

from __future__ import annotations

import math

from ..config import SimConfig
from .geometry import wrap_angle
from .types import ScenarioSpec, WorldState

IDM_ACCEL = 2.0
IDM_BRAKE = 2.5
IDM_GAP0 = 4.0
IDM_HEADWAY = 1.3
EGO_HALF_LEN = 2.2
JUNCTION_SPEED = 5.0


def _idm_accel(v, v0, gap, dv):
    """IDM acceleration toward v0 with `gap` to a lead moving dv slower."""
    gap = max(gap, 0.1)
    s_star = IDM_GAP0 + v * IDM_HEADWAY + v * dv / (2.0 * math.sqrt(IDM_ACCEL * IDM_BRAKE))
    return IDM_ACCEL * (1.0 - (v / max(v0, 0.1)) ** 4 - (max(s_star, 0.0) / gap) ** 2)


class ExpertPolicy:
    """Callable policy: world -> (accel, steer)."""

    def __init__(self, spec: ScenarioSpec, cfg: SimConfig | None = None):
        self.spec = spec
        self.cfg = cfg or SimConfig()
        self.route = spec.route
        self._stop_lines = []
        for light in spec.lights:
            if not any(lid in self.route.lane_ids for lid in light.governs):
                continue
            x1, y1, x2, y2 = light.stop_line
            s, _ = self.route.polyline.project((x1 + x2) / 2.0, (y1 + y2) / 2.0)
            self._stop_lines.append((light.id, s))
        self._cleared_zones: set = set()

    # -- helpers -----------------------------------------------------------

    def _steer(self, world: WorldState, s_ego: float) -> float:
        ego = world.ego
        lookahead = min(max(3.0 + 0.8 * ego.v, 4.0), 11.0)
        tx, ty = self.route.polyline.point_at(s_ego + lookahead)
        alpha = wrap_angle(math.atan2(ty - ego.y, tx - ego.x) - ego.heading)
        steer = math.atan2(2.0 * self.cfg.wheelbase * math.sin(alpha), lookahead)
        return min(max(steer, -self.cfg.steer_max), self.cfg.steer_max)

    def _lead_gap(self, world: WorldState, s_ego: float):
        """Nearest in-corridor agent ahead: (gap_m, speed) or None."""
        best = None
        for ag in world.agents:
            s_a, lat = self.route.polyline.project(ag.x, ag.y)
            if lat > 2.0 or s_a <= s_ego:
                continue
            # Only same-direction or stationary agents count as leads; crossers
            # and oncoming traffic go through the conflict logic instead.
            tangent = self.route.polyline.heading_at(s_a)
            if ag.speed > 0.5 and abs(wrap_angle(ag.heading - tangent)) > math.pi / 3:
                continue
            gap = s_a - s_ego - EGO_HALF_LEN - ag.hx
            if best is None or gap < best[0]:
                best = (gap, ag.speed)
        return best

    def _light_stop(self, world: WorldState, s_ego: float):
        """Distance to the nearest governing stop line currently red/yellow."""
        best = None
        for light_id, s_stop in self._stop_lines:
            idx = next(i for i, l in enumerate(self.spec.lights) if l.id == light_id)
            if world.light_states[idx] == "green":
                continue
            d = s_stop - s_ego
            if d < -1.0:
                continue
            if best is None or d < best:
                best = d
        return best

    def _pedestrian_stop(self, world: WorldState, s_ego: float):
        """Stop distance for a pedestrian inside or moving into the corridor."""
        best = None
        for ag in world.agents:
            if ag.kind != "pedestrian":
                continue
            s_p, lat = self.route.polyline.project(ag.x, ag.y)
            if s_p <= s_ego or s_p - s_ego > 45.0 or lat > 7.0:
                continue
            in_corridor = lat <= 2.6
            if not in_corridor:
                if ag.speed < 0.2:
                    continue
                # moving toward the route line?
                px, py = self.route.polyline.point_at(s_p)
                to_route = math.atan2(py - ag.y, px - ag.x)
                if abs(wrap_angle(ag.heading - to_route)) > math.pi / 3:
                    continue
            d = s_p - s_ego - 6.0
            if best is None or d < best:
                best = d
        return best

    def _cross_conflicts(self, world: WorldState, s_ego: float, v: float):
        """Hold-back distances for crossing/oncoming vehicles.

        Gap acceptance is deliberately pessimistic (assume we creep, they keep
        speed); once the nose is at the corridor we commit rather than strand
        the ego inside it.
        """
        stops = []
        for ag in world.agents:
            if ag.kind != "vehicle" or ag.speed < 0.3:
                continue
            s_a, lat = self.route.polyline.project(ag.x, ag.y)
            tangent = self.route.polyline.heading_at(s_a)
            if abs(wrap_angle(ag.heading - tangent)) < math.pi / 3:
                continue  # same direction: handled as lead
            if lat > 30.0:
                continue
            px, py = self.route.polyline.point_at(s_a)
            to_route = math.atan2(py - ag.y, px - ag.x)
            closing = ag.speed * math.cos(wrap_angle(ag.heading - to_route))
            if lat > 2.6 and closing <= 0.1:
                continue  # moving away: cleared
            t_arrive = 0.0 if lat <= 2.6 else (lat - 2.0) / max(closing, 0.1)
            t_leave = t_arrive + (2.0 * 2.6 + 2.0 * ag.hx) / max(ag.speed, 0.5)
            d_conflict = s_a - s_ego
            if d_conflict < -2.0 or d_conflict > 60.0:
                continue
            if d_conflict < 5.0:
                continue  # committed: braking now would strand us in the box
            t_us_slow = (d_conflict + 10.0) / max(min(v, JUNCTION_SPEED), 2.0)
            if t_arrive > t_us_slow + 4.0:
                continue  # we clear well before they arrive even while slow
            t_us_fast = d_conflict / max(v, 3.0)
            if t_us_fast > t_leave + 2.0:
                continue  # they clear well before we could possibly arrive
            stops.append(d_conflict - 11.0)
        return stops

    def _gap_waits(self, world: WorldState, s_ego: float):
        """Hold-back points ahead of lane-change blend zones until the target
        corridor has a safe gap.

        A zone is (s_start, s_clear_end, target_lane, oncoming_lane_or_"");
        for oncoming borrows s_clear_end covers the whole stretch driven on
        the opposing lane.
        """
        stops = []
        for zi, (s1, s_clear, target_lane, oncoming) in enumerate(self.route.blend_zones):
            if zi in self._cleared_zones:
                continue
            if s_ego > s1 - 1.0:
                self._cleared_zones.add(zi)
                continue
            if s_ego < s1 - 45.0:
                continue
            lane = self.spec.lane_graph[target_lane]
            entry_x, entry_y = self.route.polyline.point_at(s1 + 2.0)
            s_entry, _ = lane.centerline.project(entry_x, entry_y)
            safe = True
            for ag in world.agents:
                if ag.kind == "pedestrian":
                    continue
                s_a, lat = lane.centerline.project(ag.x, ag.y)
                if oncoming:
                    if ag.speed < 0.3 or lat > 4.0:
                        continue
                    # Arrival/exit times in the oncoming lane's own arc frame
                    # (their s grows along their direction of travel).
                    z_in, _ = lane.centerline.project(*self.route.polyline.point_at(s_clear))
                    z_out, _ = lane.centerline.project(*self.route.polyline.point_at(s1))
                    t_enter = (z_in - s_a) / ag.speed
                    t_exit = (z_out - s_a) / ag.speed
                    if t_exit <= 0.0:
                        continue  # already past the borrow stretch
                    t_need = (s_clear - s_ego) / 4.0 + 4.0
                    if t_enter < t_need:
                        safe = False
                else:
                    if lat > 2.0:
                        continue
                    rel = s_a - s_entry
                    if ag.speed < 0.3:
                        if -2.0 < rel < 10.0:
                            safe = False
                    elif -6.0 < rel < 8.0 or (-14.0 < rel < 0.0 and ag.speed > world.ego.v + 0.5):
                        safe = False
            if not safe:
                stops.append(s1 - 5.0 - s_ego)
        return stops

    # -- policy ------------------------------------------------------------

    def __call__(self, world: WorldState):
        ego = world.ego
        s_ego, _ = self.route.polyline.project(ego.x, ego.y)
        steer = self._steer(world, s_ego)

        v0 = self.spec.cruise_speed
        lane_here = world.lane_graph.nearest_lane(ego.x, ego.y)[0]
        upcoming = self.route.polyline.heading_at(s_ego + 8.0)
        if lane_here.kind == "junction" or abs(wrap_angle(upcoming - ego.heading)) > 0.3:
            v0 = min(v0, JUNCTION_SPEED)

        accel = _idm_accel(ego.v, v0, 1e9, 0.0)

        lead = self._lead_gap(world, s_ego)
        if lead is not None:
            gap, lead_v = lead
            accel = min(accel, _idm_accel(ego.v, v0, gap, ego.v - lead_v))

        stop_ds = []
        light_d = self._light_stop(world, s_ego)
        if light_d is not None:
            stop_ds.append(light_d - 3.0)
        ped_d = self._pedestrian_stop(world, s_ego)
        if ped_d is not None:
            stop_ds.append(ped_d)
        stop_ds.extend(self._cross_conflicts(world, s_ego, ego.v))
        stop_ds.extend(self._gap_waits(world, s_ego))

        for d in stop_ds:
            gap = max(d, 0.05)
            accel = min(accel, _idm_accel(ego.v, v0, gap, ego.v))
            if d < 0.3 and ego.v < 0.3:
                accel = min(accel, -1.0)

        accel = min(max(accel, self.cfg.accel_min), self.cfg.accel_max)
        if ego.v <= 0.0 and accel < 0.0:
            accel = max(accel, -0.5)
        return accel, steer
