"""Deterministic 10 Hz stepping of ego, scripted agents, triggers, and lights."""

from __future__ import annotations

import math
from dataclasses import replace

from ..config import SimConfig
from .geometry import Polyline, segments_intersect
from .types import (
    AgentRuntime,
    AgentState,
    EgoState,
    Infraction,
    ScenarioSpec,
    WorldState,
    ego_advanced,
)

# Scripted agents brake harder than they cruise-adjust; "abrupt" per scenario prose.
AGENT_BRAKE_DECEL = 6.0

EGO_HX = 2.2
EGO_HY = 0.95


class Simulator:
    """Owns a scenario plus precomputed script paths; stepping is pure."""

    def __init__(self, spec: ScenarioSpec, cfg: SimConfig | None = None):
        self.spec = spec
        self.cfg = cfg or SimConfig()
        self.paths = [Polyline(sc.path) if sc.path else None for _, sc in spec.agents]

    def reset(self) -> WorldState:
        # Agents referenced by a `spawn` effect start absent; movers scripted
        # with start_active=False stand idle at their spawn pose.
        runtime = []
        spawn_targets = {t.effect[1] for t in self.spec.triggers if t.effect[0] == "spawn"}
        for i, (state, script) in enumerate(self.spec.agents):
            present = i not in spawn_targets
            if script.behavior == "parked":
                mode = "idle"
            else:
                mode = "drive" if script.start_active else "idle"
            runtime.append(AgentRuntime(present=present, mode=mode, mode_tick=0,
                                        s=0.0, speed=state.speed if mode == "drive" else 0.0))
        world = WorldState(
            tick=0,
            ego=self.spec.ego_spawn,
            agents=(),
            light_states=tuple(l.state_at(0.0) for l in self.spec.lights),
            runtime=tuple(runtime),
            fired=tuple(False for _ in self.spec.triggers),
            events=(),
            scenario=self.spec,
        )
        return replace(world, agents=self._materialize(world.runtime))

    def _agent_pose(self, i: int, rt: AgentRuntime):
        state, script = self.spec.agents[i]
        path = self.paths[i]
        if path is None or (rt.mode == "idle" and rt.s == 0.0):
            return state.x, state.y, state.heading
        x, y = path.point_at(rt.s)
        return x, y, path.heading_at(rt.s)

    def _materialize(self, runtime) -> tuple:
        agents = []
        for i, rt in enumerate(runtime):
            if not rt.present:
                continue
            state, _ = self.spec.agents[i]
            x, y, heading = self._agent_pose(i, rt)
            agents.append(AgentState(id=state.id, kind=state.kind, x=x, y=y,
                                     heading=heading, speed=rt.speed,
                                     hx=state.hx, hy=state.hy))
        return tuple(agents)

    def _advance_agent(self, i: int, rt: AgentRuntime, tick: int, dt: float) -> AgentRuntime:
        _, script = self.spec.agents[i]
        if not rt.present or script.behavior == "parked" or rt.mode in ("idle", "done"):
            return rt
        path = self.paths[i]
        speed, mode, mode_tick = rt.speed, rt.mode, rt.mode_tick
        if mode == "brake_hold":
            speed = max(0.0, speed - AGENT_BRAKE_DECEL * dt)
            if tick - mode_tick >= script.brake_hold_ticks:
                mode, mode_tick = "drive", tick
        elif mode == "drive":
            if speed < script.cruise_speed:
                speed = min(script.cruise_speed, speed + script.accel * dt)
            else:
                speed = max(script.cruise_speed, speed - script.accel * dt)
        s = rt.s + speed * dt
        if path is not None and s >= path.length:
            return AgentRuntime(present=True, mode="done", mode_tick=tick,
                                s=path.length, speed=0.0)
        return AgentRuntime(present=True, mode=mode, mode_tick=mode_tick, s=s, speed=speed)

    def step(self, world: WorldState, action) -> WorldState:
        """One tick: ego bicycle step, scripted agents, triggers, light schedule."""
        cfg = self.cfg
        accel = min(max(float(action[0]), cfg.accel_min), cfg.accel_max)
        steer = min(max(float(action[1]), -cfg.steer_max), cfg.steer_max)
        tick = world.tick + 1
        ego = ego_advanced(world.ego, accel, steer, cfg.dt, cfg.wheelbase, cfg.speed_max)

        runtime = [self._advance_agent(i, rt, tick, cfg.dt)
                   for i, rt in enumerate(world.runtime)]

        events = []
        fired = list(world.fired)
        for ti, trig in enumerate(self.spec.triggers):
            if fired[ti]:
                continue
            kind = trig.condition[0]
            if kind == "ego_within":
                _, cx, cy, radius = trig.condition
                hit = math.hypot(ego.x - cx, ego.y - cy) <= radius
            elif kind == "tick_ge":
                hit = tick >= trig.condition[1]
            else:
                raise ValueError(f"unknown trigger condition {kind!r}")
            if not hit:
                continue
            fired[ti] = True
            effect, ai = trig.effect
            rt = runtime[ai]
            if effect == "spawn":
                runtime[ai] = replace(rt, present=True, mode="drive", mode_tick=tick,
                                      speed=0.0)
            elif effect == "start":
                runtime[ai] = replace(rt, mode="drive", mode_tick=tick)
            elif effect == "brake":
                runtime[ai] = replace(rt, mode="brake_hold", mode_tick=tick)
            else:
                raise ValueError(f"unknown trigger effect {effect!r}")
            events.append(f"trigger:{ti}:{effect}:{ai}")

        runtime = tuple(runtime)
        return WorldState(
            tick=tick,
            ego=ego,
            agents=self._materialize(runtime),
            light_states=tuple(l.state_at(tick * cfg.dt) for l in self.spec.lights),
            runtime=runtime,
            fired=tuple(fired),
            events=tuple(events),
            scenario=self.spec,
        )


def step(world: WorldState, action, dt: float = 0.1) -> WorldState:
    """One-off step for tests; episode loops should reuse a Simulator."""
    sim = Simulator(world.scenario, SimConfig(dt=dt))
    return sim.step(world, action)


def detect_infractions(prev: WorldState, cur: WorldState,
                       offroad_margin: float = 2.5) -> list[Infraction]:
    """Raw per-tick infractions; episode-level dedupe lives in InfractionTracker."""
    from .geometry import obb_overlap

    found = []
    ego_box = (cur.ego.x, cur.ego.y, cur.ego.heading, EGO_HX, EGO_HY)
    for ag in cur.agents:
        if obb_overlap(ego_box, (ag.x, ag.y, ag.heading, ag.hx, ag.hy)):
            found.append(Infraction(kind=f"collision_{ag.kind}", tick=cur.tick,
                                    agent_id=ag.id))

    move = ((prev.ego.x, prev.ego.y), (cur.ego.x, cur.ego.y))
    for li, light in enumerate(cur.scenario.lights):
        if prev.light_states[li] != "red":
            continue
        x1, y1, x2, y2 = light.stop_line
        if not segments_intersect(move[0], move[1], (x1, y1), (x2, y2)):
            continue
        if any(lid in cur.route.lane_ids for lid in light.governs):
            found.append(Infraction(kind="red_light", tick=cur.tick, agent_id=light.id))

    best = min(ln.centerline.project(cur.ego.x, cur.ego.y)[1]
               for ln in cur.lane_graph.lanes.values())
    if best > offroad_margin:
        found.append(Infraction(kind="off_road", tick=cur.tick))
    return found


class InfractionTracker:
    """Keeps at most one infraction per (kind, agent) per episode."""

    def __init__(self, offroad_margin: float = 2.5):
        self.offroad_margin = offroad_margin
        self.seen: set = set()
        self.infractions: list[Infraction] = []

    def update(self, prev: WorldState, cur: WorldState) -> list[Infraction]:
        fresh = []
        for inf in detect_infractions(prev, cur, self.offroad_margin):
            key = (inf.kind, inf.agent_id)
            if key in self.seen:
                continue
            self.seen.add(key)
            fresh.append(inf)
        self.infractions.extend(fresh)
        return fresh


def route_completion(world: WorldState) -> float:
    """Fraction of route arc length reached by the ego projection."""
    route = world.route
    s, _ = route.polyline.project(world.ego.x, world.ego.y)
    return min(1.0, max(0.0, s / route.total_length))


class CompletionTracker:
    """Monotone route completion over an episode."""

    def __init__(self):
        self.best = 0.0

    def update(self, world: WorldState) -> float:
        self.best = max(self.best, route_completion(world))
        return self.best


def rollout(spec: ScenarioSpec, policy, max_ticks: int,
            cfg: SimConfig | None = None) -> list[WorldState]:
    """Run `policy(world) -> (accel, steer)` until route end or tick budget."""
    sim = Simulator(spec, cfg)
    world = sim.reset()
    worlds = [world]
    done_s = spec.route.total_length - 0.5
    for _ in range(max_ticks):
        world = sim.step(world, policy(world))
        worlds.append(world)
        s, _ = spec.route.polyline.project(world.ego.x, world.ego.y)
        if s >= done_s:
            break
    return worlds
