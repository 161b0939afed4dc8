import numpy as np
import pytest

from reasonplan.sim.geometry import Polyline
from reasonplan.sim.types import (
    AgentScript,
    AgentState,
    EgoState,
    Lane,
    LaneGraph,
    Route,
    ScenarioSpec,
    TrafficLight,
)


def straight_spec(length=100.0, ego_x=0.0, ego_v=0.0, agents=(), lights=(),
                  triggers=(), n_lanes=1):
    """Minimal straight-road scenario for unit tests."""
    lanes = []
    for i in range(n_lanes):
        left = f"lane{i+1}" if i + 1 < n_lanes else None
        right = f"lane{i-1}" if i > 0 else None
        lanes.append(Lane(id=f"lane{i}", centerline=Polyline([(0.0, 3.5 * i), (length, 3.5 * i)]),
                          left=left, right=right))
    return ScenarioSpec(
        name="unit", kind="unit", seed=0, ability="Merging",
        lane_graph=LaneGraph(lanes),
        route=Route(lane_ids=("lane0",), polyline=Polyline([(0.0, 0.0), (length, 0.0)])),
        ego_spawn=EgoState(x=ego_x, y=0.0, heading=0.0, v=ego_v),
        agents=tuple(agents), lights=tuple(lights), triggers=tuple(triggers),
    )


def parked(aid, x, y, kind="vehicle", hx=2.2, hy=0.95, heading=0.0):
    state = AgentState(id=aid, kind=kind, x=x, y=y, heading=heading,
                       speed=0.0, hx=hx, hy=hy)
    return state, AgentScript(behavior="parked")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
