"""Ground-truth world model: ego, agents, lanes, routes, lights, scenarios."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .geometry import Polyline, wrap_angle

# Raster semantic classes (pseudo-camera cell values).
CLS_EMPTY = 0
CLS_LANE = 1
CLS_VEHICLE = 2
CLS_PEDESTRIAN = 3
CLS_STATIC = 4
CLS_RED = 5
CLS_YELLOW = 6
CLS_GREEN = 7
CLS_ROUTE_MARKER = 8
N_CLASSES = 9

CLASS_NAMES = ("empty", "lane", "vehicle", "pedestrian", "static",
               "red", "yellow", "green", "route_marker")

# Navigation commands, in one-hot order.
COMMANDS = ("follow", "left", "right", "straight", "change_left", "change_right")

CAMERA_NAMES = ("CAM_FRONT", "CAM_FRONT_LEFT", "CAM_FRONT_RIGHT",
                "CAM_BACK_LEFT", "CAM_BACK_RIGHT", "CAM_BACK")
CAMERA_YAWS = (0.0, math.radians(60.0), math.radians(-60.0),
               math.radians(120.0), math.radians(-120.0), math.pi)

ABILITIES = ("Merging", "Overtaking", "EmergencyBrake", "GiveWay", "TrafficSign")


@dataclass(frozen=True)
class EgoState:
    x: float
    y: float
    heading: float
    v: float
    a: float = 0.0
    steer: float = 0.0


@dataclass(frozen=True)
class AgentState:
    id: int
    kind: str                 # vehicle | pedestrian | static
    x: float
    y: float
    heading: float
    speed: float
    hx: float                 # bbox half extents
    hy: float


@dataclass(frozen=True)
class TrafficLight:
    id: int
    stop_line: tuple          # (x1, y1, x2, y2)
    schedule: tuple           # ((state, duration_s), ...), cycles from tick 0
    governs: tuple            # lane ids the light controls

    def state_at(self, t: float) -> str:
        cycle = sum(d for _, d in self.schedule)
        t = math.fmod(t, cycle)
        for state, dur in self.schedule:
            if t < dur:
                return state
            t -= dur
        return self.schedule[-1][0]


@dataclass(frozen=True)
class Sign:
    kind: str                 # warning | construction
    x: float
    y: float


@dataclass
class Lane:
    id: str
    centerline: Polyline
    width: float = 3.5
    kind: str = "drive"       # drive | junction
    successors: tuple = ()
    left: str | None = None
    right: str | None = None


class LaneGraph:
    def __init__(self, lanes: list[Lane]):
        self.lanes = {ln.id: ln for ln in lanes}
        for ln in lanes:
            if ln.left is not None and self.lanes[ln.left].right != ln.id:
                raise ValueError(f"asymmetric left/right link at {ln.id}")
            if ln.right is not None and self.lanes[ln.right].left != ln.id:
                raise ValueError(f"asymmetric right/left link at {ln.id}")

    def __getitem__(self, lane_id: str) -> Lane:
        return self.lanes[lane_id]

    def nearest_lane(self, x: float, y: float):
        """(lane, arc_s, distance) of the closest lane centerline."""
        best = None
        for ln in self.lanes.values():
            s, d = ln.centerline.project(x, y)
            if best is None or d < best[2]:
                best = (ln, s, d)
        return best


@dataclass
class Route:
    lane_ids: tuple
    polyline: Polyline
    commands: tuple = ()      # ((arc_s, command), ...) sorted by arc_s
    blend_zones: tuple = ()   # ((s_start, s_end, target_lane, oncoming_lane|""), ...)

    @property
    def total_length(self) -> float:
        return self.polyline.length

    def command_at(self, s: float) -> str:
        cmd = "follow"
        for cs, c in self.commands:
            if cs <= s:
                cmd = c
        return cmd


@dataclass(frozen=True)
class AgentScript:
    behavior: str             # parked | path_drive | path_walk
    path: tuple = ()          # waypoints, empty for parked
    cruise_speed: float = 0.0
    accel: float = 2.0        # |dv/dt| bound while speeding up / braking
    start_active: bool = True # False: stands at spawn until a `start` effect
    brake_hold_ticks: int = 30


@dataclass(frozen=True)
class Trigger:
    condition: tuple          # ("ego_within", x, y, radius) | ("tick_ge", k)
    effect: tuple             # ("spawn"|"start"|"brake", agent_index)


@dataclass(frozen=True)
class AgentRuntime:
    present: bool
    mode: str                 # idle | drive | brake_hold | done
    mode_tick: int
    s: float                  # progress along script path
    speed: float


@dataclass
class ScenarioSpec:
    name: str
    kind: str
    seed: int
    ability: str
    lane_graph: LaneGraph
    route: Route
    ego_spawn: EgoState
    agents: tuple = ()        # ((AgentState, AgentScript), ...) spawn poses
    lights: tuple = ()
    signs: tuple = ()
    triggers: tuple = ()
    cruise_speed: float = 8.0

    def describe(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "seed": self.seed,
            "ability": self.ability,
            "n_agents": len(self.agents),
            "n_lights": len(self.lights),
            "n_triggers": len(self.triggers),
            "route_length": round(self.route.total_length, 3),
        }


@dataclass(frozen=True)
class WorldState:
    tick: int
    ego: EgoState
    agents: tuple             # present AgentStates only
    light_states: tuple       # live state string per scenario light
    runtime: tuple            # AgentRuntime per scenario agent (index aligned)
    fired: tuple              # bool per trigger
    events: tuple             # event strings emitted this tick
    scenario: ScenarioSpec = field(repr=False, compare=False, default=None)

    @property
    def lane_graph(self) -> LaneGraph:
        return self.scenario.lane_graph

    @property
    def route(self) -> Route:
        return self.scenario.route


@dataclass(frozen=True)
class Infraction:
    kind: str                 # collision_* | red_light | off_road
    tick: int
    agent_id: int | None = None


def ego_advanced(ego: EgoState, accel: float, steer: float, dt: float,
                 wheelbase: float, speed_max: float) -> EgoState:
    """Kinematic bicycle step: position moves with the pre-update speed."""
    x = ego.x + ego.v * math.cos(ego.heading) * dt
    y = ego.y + ego.v * math.sin(ego.heading) * dt
    heading = wrap_angle(ego.heading + ego.v / wheelbase * math.tan(steer) * dt)
    v = min(max(ego.v + accel * dt, 0.0), speed_max)
    return EgoState(x=x, y=y, heading=heading, v=v, a=accel, steer=steer)


def replace_ego(world: WorldState, ego: EgoState) -> WorldState:
    return replace(world, ego=ego)
