"""Closed-loop episodes and their scoring: RC, IS, DS, success, Effi, Comf."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..config import Config, EvalConfig
from ..sim import (
    CompletionTracker,
    InfractionTracker,
    Simulator,
    trace_hash,
)
from ..sim.types import ScenarioSpec

PENALTY_KEYS = {
    "collision_pedestrian": "penalty_collision_pedestrian",
    "collision_vehicle": "penalty_collision_vehicle",
    "collision_static": "penalty_collision_static",
    "red_light": "penalty_red_light",
    "off_road": "penalty_off_road",
}


def penalty_table(cfg: EvalConfig) -> dict:
    return {kind: getattr(cfg, key) for kind, key in PENALTY_KEYS.items()}


def infraction_score(infractions, penalties: dict) -> float:
    score = 1.0
    for inf in infractions:
        score *= penalties[inf.kind]
    return score


@dataclass
class EpisodeResult:
    scenario: str
    kind: str
    seed: int
    ability: str
    rc: float
    infraction_score: float
    driving_score: float
    success: bool
    infractions: list
    efficiency: float
    comfort: float
    ticks: int
    trace_hash: str
    planner_faults: int = 0
    penalties: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema"] = "reasonplan.episode.v1"
        return d


def run_episode(spec: ScenarioSpec, policy, cfg: Config | None = None,
                keep_trace: bool = False):
    """Drive one scenario with `policy(world) -> (accel, steer)`."""
    cfg = cfg or Config()
    ecfg = cfg.eval
    penalties = penalty_table(ecfg)
    sim = Simulator(spec, cfg.sim)
    world = sim.reset()
    worlds = [world]
    inf_tracker = InfractionTracker(cfg.sim.offroad_margin)
    completion = CompletionTracker()
    completion.update(world)

    ratios = []
    comfort_ok = 0
    prev_a = 0.0
    blocked = 0
    done = False
    finish_s = spec.route.total_length - 0.5
    while world.tick < ecfg.timeout_ticks and not done:
        action = policy(world)
        nxt = sim.step(world, action)
        inf_tracker.update(world, nxt)
        completion.update(nxt)
        worlds.append(nxt)

        neighbors = [a.speed for a in nxt.agents if a.kind == "vehicle"
                     and np.hypot(a.x - nxt.ego.x, a.y - nxt.ego.y) <= ecfg.neighbor_radius]
        if neighbors:
            mean_n = float(np.mean(neighbors))
            if mean_n > 0.1:
                ratios.append(min(nxt.ego.v / mean_n, ecfg.efficiency_cap / 100.0))
        jerk = (nxt.ego.a - prev_a) / cfg.sim.dt if nxt.tick > 1 else 0.0
        if abs(nxt.ego.a) <= ecfg.comfort_accel and abs(jerk) <= ecfg.comfort_jerk:
            comfort_ok += 1
        prev_a = nxt.ego.a

        blocked = blocked + 1 if nxt.ego.v < 0.1 else 0
        s, _ = spec.route.polyline.project(nxt.ego.x, nxt.ego.y)
        if s >= finish_s:
            done = True
        elif blocked > ecfg.blocked_ticks:
            break
        world = nxt

    rc = 1.0 if done else completion.best
    score = infraction_score(inf_tracker.infractions, penalties)
    ds = 100.0 * rc * score
    ticks = worlds[-1].tick
    success = done and score == 1.0 and ticks <= ecfg.timeout_ticks
    result = EpisodeResult(
        scenario=spec.name, kind=spec.kind, seed=spec.seed, ability=spec.ability,
        rc=rc, infraction_score=score, driving_score=ds, success=success,
        infractions=[{"kind": i.kind, "tick": i.tick, "agent_id": i.agent_id}
                     for i in inf_tracker.infractions],
        efficiency=100.0 * float(np.mean(ratios)) if ratios else 100.0,
        comfort=100.0 * comfort_ok / max(ticks, 1),
        ticks=ticks,
        trace_hash=trace_hash(worlds),
        planner_faults=len(getattr(policy, "faults", [])),
        penalties=penalties,
    )
    return (result, worlds) if keep_trace else (result, None)
