"""Scenario library: ten parameterized interaction cases with seeded placement.

Kinds cover the occlusion suite (DOS01-04) plus merge/overtake/give-way/
signal/pedestrian/accident cases; each carries the ability class its episode
success contributes to.
"""

from __future__ import annotations

import numpy as np

from .geometry import Polyline
from .types import (
    AgentScript,
    AgentState,
    EgoState,
    Lane,
    LaneGraph,
    Route,
    ScenarioSpec,
    Sign,
    TrafficLight,
    Trigger,
)

SCENARIO_KINDS = (
    "DOS01_parked_cars", "DOS02_sudden_brake", "DOS03_left_turn", "DOS04_red_light",
    "merge", "overtake", "give_way", "sign_stop", "pedestrian_crossing",
    "accident_two_ways",
)

LANE_W = 3.5
CAR = (2.2, 0.95)
TRUCK = (4.5, 1.35)
PED = (0.35, 0.35)


def _straight_lane(lane_id, x0, x1, y, width=LANE_W, kind="drive", **kw):
    return Lane(id=lane_id, centerline=Polyline([(x0, y), (x1, y)]),
                width=width, kind=kind, **kw)


def _blend_polyline(x0, y0, s_start, s_end, y1, x_end):
    """Straight at y0, linear blend to y1 over [s_start, s_end], on to x_end."""
    return Polyline([(x0, y0), (s_start, y0), (s_end, y1), (x_end, y1)])


def _arc(cx, cy, radius, a0, a1, n=14):
    ang = np.linspace(a0, a1, n)
    return [(cx + radius * np.cos(a), cy + radius * np.sin(a)) for a in ang]


def _vehicle(aid, x, y, heading=0.0, speed=0.0, size=CAR, kind="vehicle"):
    return AgentState(id=aid, kind=kind, x=x, y=y, heading=heading,
                      speed=speed, hx=size[0], hy=size[1])


def _pedestrian(aid, x, y, heading):
    return AgentState(id=aid, kind="pedestrian", x=x, y=y, heading=heading,
                      speed=0.0, hx=PED[0], hy=PED[1])


def make_scenario(kind: str, seed: int) -> ScenarioSpec:
    if kind not in SCENARIO_KINDS:
        raise ValueError(f"unknown scenario kind {kind!r}; known: {SCENARIO_KINDS}")
    rng = np.random.default_rng(np.uint64(seed))
    builder = _BUILDERS[kind]
    spec = builder(rng)
    spec.kind = kind
    spec.seed = seed
    spec.name = f"{kind}_s{seed}"
    return spec


def _dos01_parked_cars(rng) -> ScenarioSpec:
    length = 160.0
    lane0 = _straight_lane("lane0", 0.0, length, 0.0)
    graph = LaneGraph([lane0])
    route = Route(lane_ids=("lane0",), polyline=Polyline([(0.0, 0.0), (length, 0.0)]))

    agents = []
    aid = 0
    for side in (+1.0, -1.0):
        x = 40.0 + rng.uniform(0.0, 4.0)
        while x < 95.0:
            agents.append((_vehicle(aid, x, side * (LANE_W / 2 + 1.5)), AgentScript(behavior="parked")))
            aid += 1
            x += rng.uniform(8.0, 11.0)

    cross_x = rng.uniform(62.0, 78.0)
    ped = _pedestrian(aid, cross_x, -6.0, np.pi / 2)
    walk = AgentScript(behavior="path_walk", path=((cross_x, -6.0), (cross_x, 6.0)),
                       cruise_speed=rng.uniform(1.5, 1.9), accel=2.0, start_active=False)
    agents.append((ped, walk))
    trig = Trigger(condition=("ego_within", cross_x, 0.0, 26.0), effect=("start", aid))

    return ScenarioSpec(
        name="", kind="", seed=0, ability="EmergencyBrake",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=0.0, y=0.0, heading=0.0, v=6.0),
        agents=tuple(agents), triggers=(trig,), cruise_speed=7.0,
    )


def _dos02_sudden_brake(rng) -> ScenarioSpec:
    length = 180.0
    lane0 = _straight_lane("lane0", 0.0, length, 0.0)
    graph = LaneGraph([lane0])
    route = Route(lane_ids=("lane0",), polyline=Polyline([(0.0, 0.0), (length, 0.0)]))

    lead_x = rng.uniform(24.0, 30.0)
    lead = _vehicle(0, lead_x, 0.0, speed=6.0)
    lead_script = AgentScript(behavior="path_drive", path=((lead_x, 0.0), (length + 40.0, 0.0)),
                              cruise_speed=6.0, accel=2.0, brake_hold_ticks=45)

    # The pedestrian that prompts the brake stays beyond camera range at spawn.
    ped_x = rng.uniform(95.0, 110.0)
    ped = _pedestrian(1, ped_x, 7.0, -np.pi / 2)
    ped_script = AgentScript(behavior="path_walk", path=((ped_x, 7.0), (ped_x, 3.2)),
                             cruise_speed=1.6, accel=2.0, start_active=False)

    brake_at = rng.uniform(38.0, 44.0)
    triggers = (
        Trigger(condition=("ego_within", brake_at, 0.0, 12.0), effect=("brake", 0)),
        Trigger(condition=("ego_within", brake_at, 0.0, 12.0), effect=("start", 1)),
    )
    return ScenarioSpec(
        name="", kind="", seed=0, ability="EmergencyBrake",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=0.0, y=0.0, heading=0.0, v=6.0),
        agents=(( lead, lead_script), (ped, ped_script)), triggers=triggers,
        cruise_speed=7.0,
    )


def _dos03_left_turn(rng) -> ScenarioSpec:
    # Ego eastbound on y=0, turning left onto the northbound exit at x=1.75.
    # Turn radius 7 m: tight enough that the heading swings hard mid-junction.
    approach = _straight_lane("approach", -70.0, -10.0, 0.0, successors=("turn",))
    arc_pts = [(-10.0, 0.0)] + _arc(-5.25, 7.0, 7.0, -np.pi / 2, 0.0)[1:] + [(1.75, 9.0)]
    turn = Lane(id="turn", centerline=Polyline(arc_pts), kind="junction", successors=("exit_n",))
    exit_n = Lane(id="exit_n", centerline=Polyline([(1.75, 9.0), (1.75, 80.0)]))
    oncoming = _straight_lane("oncoming", 90.0, -70.0, LANE_W)
    graph = LaneGraph([approach, turn, exit_n, oncoming])

    route_pts = [(-70.0, 0.0)] + arc_pts + [(1.75, 80.0)]
    route = Route(lane_ids=("approach", "turn", "exit_n"), polyline=Polyline(route_pts),
                  commands=((0.0, "follow"), (30.0, "left"), (85.0, "follow")))

    truck = _vehicle(0, 16.0 + rng.uniform(-2.0, 2.0), 6.2, heading=np.pi, size=TRUCK)
    x1 = rng.uniform(38.0, 46.0)
    x2 = x1 + rng.uniform(32.0, 40.0)
    cars = []
    for i, x in enumerate((x1, x2), start=1):
        car = _vehicle(i, x, LANE_W, heading=np.pi, speed=7.0)
        script = AgentScript(behavior="path_drive", path=((x, LANE_W), (-70.0, LANE_W)),
                             cruise_speed=7.0, accel=2.0)
        cars.append((car, script))
    return ScenarioSpec(
        name="", kind="", seed=0, ability="GiveWay",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=-70.0, y=0.0, heading=0.0, v=6.0),
        agents=((truck, AgentScript(behavior="parked")),) + tuple(cars),
        cruise_speed=6.5,
    )


def _dos04_red_light(rng) -> ScenarioSpec:
    # Ego runs straight through on green; an occluded cross vehicle runs its red.
    length = 90.0
    lane0 = _straight_lane("lane0", -60.0, length, 0.0)
    cross = Lane(id="cross", centerline=Polyline([(1.75, -55.0), (1.75, 55.0)]))
    graph = LaneGraph([lane0, cross])
    route = Route(lane_ids=("lane0",), polyline=Polyline([(-60.0, 0.0), (length, 0.0)]))

    ego_light = TrafficLight(id=0, stop_line=(-6.0, -2.5, -6.0, 2.5),
                             schedule=(("green", 300.0),), governs=("lane0",))
    cross_light = TrafficLight(id=1, stop_line=(-0.75, -6.0, 4.25, -6.0),
                               schedule=(("red", 300.0),), governs=("cross",))

    trucks = []
    for i, x in enumerate((-16.0 + rng.uniform(-2.0, 2.0), -26.0 + rng.uniform(-2.0, 2.0))):
        trucks.append((_vehicle(i, x, -4.6, size=TRUCK), AgentScript(behavior="parked")))

    runner = _vehicle(2, 1.75, -45.0, heading=np.pi / 2, speed=0.0)
    runner_script = AgentScript(behavior="path_drive", path=((1.75, -45.0), (1.75, 55.0)),
                                cruise_speed=rng.uniform(8.0, 9.0), accel=4.0,
                                start_active=False)
    trig = Trigger(condition=("ego_within", -6.0, 0.0, 26.0), effect=("start", 2))
    return ScenarioSpec(
        name="", kind="", seed=0, ability="GiveWay",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=-60.0, y=0.0, heading=0.0, v=6.0),
        agents=tuple(trucks) + ((runner, runner_script),),
        lights=(ego_light, cross_light), triggers=(trig,),
        cruise_speed=7.0,
    )


def _merge(rng) -> ScenarioSpec:
    length = 150.0
    s1 = 55.0 + rng.uniform(-5.0, 5.0)
    s2 = s1 + 20.0
    lane0 = _straight_lane("lane0", 0.0, length, 0.0, left="lane1")
    lane1 = _straight_lane("lane1", 0.0, length, LANE_W, right="lane0")
    graph = LaneGraph([lane0, lane1])
    route = Route(
        lane_ids=("lane0", "lane1"),
        polyline=_blend_polyline(0.0, 0.0, s1, s2, LANE_W, length),
        commands=((0.0, "follow"), (s1 - 25.0, "change_left"), (s2 + 5.0, "follow")),
        blend_zones=((s1, s2, "lane1", ""),),
    )
    behind = _vehicle(0, -30.0, LANE_W, speed=5.0)
    behind_script = AgentScript(behavior="path_drive", path=((-30.0, LANE_W), (length, LANE_W)),
                                cruise_speed=5.0, accel=1.5)
    ahead_x = 60.0 + rng.uniform(0.0, 10.0)
    ahead = _vehicle(1, ahead_x, LANE_W, speed=7.5)
    ahead_script = AgentScript(behavior="path_drive", path=((ahead_x, LANE_W), (length + 60.0, LANE_W)),
                               cruise_speed=7.5, accel=1.5)
    return ScenarioSpec(
        name="", kind="", seed=0, ability="Merging",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=0.0, y=0.0, heading=0.0, v=6.0),
        agents=((behind, behind_script), (ahead, ahead_script)),
        cruise_speed=7.0,
    )


def _overtake(rng) -> ScenarioSpec:
    length = 170.0
    block_x = 70.0 + rng.uniform(-5.0, 5.0)
    s1, s2 = block_x - 22.0, block_x - 8.0
    s3, s4 = block_x + 12.0, block_x + 26.0
    lane0 = _straight_lane("lane0", 0.0, length, 0.0, left="lane1")
    lane1 = _straight_lane("lane1", 0.0, length, LANE_W, right="lane0")
    graph = LaneGraph([lane0, lane1])
    route = Route(
        lane_ids=("lane0", "lane1", "lane0"),
        polyline=Polyline([(0.0, 0.0), (s1, 0.0), (s2, LANE_W), (s3, LANE_W),
                           (s4, 0.0), (length, 0.0)]),
        commands=((0.0, "follow"), (s1 - 20.0, "change_left"),
                  (s2 + 2.0, "follow"), (s3 - 6.0, "change_right"), (s4 + 2.0, "follow")),
        blend_zones=((s1, s2, "lane1", ""), (s3, s4, "lane0", "")),
    )
    blocker = _vehicle(0, block_x, 0.0, speed=0.0)
    sign = Sign(kind="warning", x=block_x - 25.0, y=-3.2)
    return ScenarioSpec(
        name="", kind="", seed=0, ability="Overtaking",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=0.0, y=0.0, heading=0.0, v=6.0),
        agents=((blocker, AgentScript(behavior="parked")),),
        signs=(sign,), cruise_speed=7.0,
    )


def _give_way(rng) -> ScenarioSpec:
    length = 80.0
    lane0 = _straight_lane("lane0", -60.0, length, 0.0)
    cross = Lane(id="cross", centerline=Polyline([(-1.75, 50.0), (-1.75, -50.0)]))
    graph = LaneGraph([lane0, cross])
    route = Route(lane_ids=("lane0",), polyline=Polyline([(-60.0, 0.0), (length, 0.0)]))
    start_y = 52.0 + rng.uniform(0.0, 8.0)
    crosser = _vehicle(0, -1.75, start_y, heading=-np.pi / 2, speed=6.5)
    script = AgentScript(behavior="path_drive", path=((-1.75, start_y), (-1.75, -50.0)),
                         cruise_speed=6.5, accel=2.0)
    return ScenarioSpec(
        name="", kind="", seed=0, ability="GiveWay",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=-60.0, y=0.0, heading=0.0, v=6.0),
        agents=((crosser, script),), cruise_speed=7.0,
    )


def _sign_stop(rng) -> ScenarioSpec:
    length = 100.0
    lane0 = _straight_lane("lane0", -70.0, length, 0.0)
    graph = LaneGraph([lane0])
    route = Route(lane_ids=("lane0",), polyline=Polyline([(-70.0, 0.0), (length, 0.0)]))
    red_s = rng.uniform(14.0, 18.0)
    light = TrafficLight(id=0, stop_line=(-4.0, -2.5, -4.0, 2.5),
                         schedule=(("red", red_s), ("green", 60.0), ("yellow", 3.0)),
                         governs=("lane0",))
    return ScenarioSpec(
        name="", kind="", seed=0, ability="TrafficSign",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=-70.0, y=0.0, heading=0.0, v=6.0),
        lights=(light,), cruise_speed=7.0,
    )


def _pedestrian_crossing(rng) -> ScenarioSpec:
    length = 150.0
    lane0 = _straight_lane("lane0", 0.0, length, 0.0)
    graph = LaneGraph([lane0])
    route = Route(lane_ids=("lane0",), polyline=Polyline([(0.0, 0.0), (length, 0.0)]))
    cross_x = rng.uniform(60.0, 72.0)
    ped = _pedestrian(0, cross_x, -7.0, np.pi / 2)
    walk = AgentScript(behavior="path_walk", path=((cross_x, -7.0), (cross_x, 7.0)),
                       cruise_speed=1.7, accel=2.0, start_active=False)
    trig = Trigger(condition=("ego_within", cross_x, 0.0, 30.0), effect=("start", 0))
    sign = Sign(kind="warning", x=cross_x - 12.0, y=-4.0)
    return ScenarioSpec(
        name="", kind="", seed=0, ability="EmergencyBrake",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=0.0, y=0.0, heading=0.0, v=6.0),
        agents=((ped, walk),), triggers=(trig,), signs=(sign,),
        cruise_speed=7.0,
    )


def _accident_two_ways(rng) -> ScenarioSpec:
    length = 170.0
    block_x = 72.0 + rng.uniform(-4.0, 4.0)
    s1, s2 = block_x - 18.0, block_x - 6.0
    s3, s4 = block_x + 10.0, block_x + 22.0
    lane0 = _straight_lane("lane0", 0.0, length, 0.0, left="onc0")
    onc0 = Lane(id="onc0", centerline=Polyline([(320.0, LANE_W), (0.0, LANE_W)]),
                right="lane0")
    graph = LaneGraph([lane0, onc0])
    route = Route(
        lane_ids=("lane0", "onc0", "lane0"),
        polyline=Polyline([(0.0, 0.0), (s1, 0.0), (s2, LANE_W), (s3, LANE_W),
                           (s4, 0.0), (length, 0.0)]),
        commands=((0.0, "follow"), (s1 - 20.0, "change_left"),
                  (s2 + 2.0, "follow"), (s3 - 6.0, "change_right"), (s4 + 2.0, "follow")),
        blend_zones=((s1, s4, "onc0", "onc0"), (s3, s4, "lane0", "")),
    )
    wreck1 = _vehicle(0, block_x, 0.2, heading=0.3, kind="static")
    wreck2 = _vehicle(1, block_x + 5.5, -0.4, heading=-0.3, kind="static")
    on_x = 125.0 + rng.uniform(0.0, 10.0)
    onc_far_x = on_x + 140.0
    oncs = []
    for i, x in enumerate((on_x, onc_far_x), start=2):
        car = _vehicle(i, x, LANE_W, heading=np.pi, speed=7.0)
        script = AgentScript(behavior="path_drive", path=((x, LANE_W), (-40.0, LANE_W)),
                             cruise_speed=7.0, accel=2.0)
        oncs.append((car, script))
    sign = Sign(kind="construction", x=block_x - 30.0, y=-3.2)
    return ScenarioSpec(
        name="", kind="", seed=0, ability="Overtaking",
        lane_graph=graph, route=route,
        ego_spawn=EgoState(x=0.0, y=0.0, heading=0.0, v=6.0),
        agents=((wreck1, AgentScript(behavior="parked")),
                (wreck2, AgentScript(behavior="parked"))) + tuple(oncs),
        signs=(sign,), cruise_speed=6.5,
    )


_BUILDERS = {
    "DOS01_parked_cars": _dos01_parked_cars,
    "DOS02_sudden_brake": _dos02_sudden_brake,
    "DOS03_left_turn": _dos03_left_turn,
    "DOS04_red_light": _dos04_red_light,
    "merge": _merge,
    "overtake": _overtake,
    "give_way": _give_way,
    "sign_stop": _sign_stop,
    "pedestrian_crossing": _pedestrian_crossing,
    "accident_two_ways": _accident_two_ways,
}
