from .expert import ExpertPolicy
from .render import PseudoFrame, render_pseudo_cameras
from .scenarios import SCENARIO_KINDS, make_scenario
from .simulator import (
    CompletionTracker,
    InfractionTracker,
    Simulator,
    detect_infractions,
    rollout,
    route_completion,
    step,
)
from .trace import read_trace, tick_record, trace_hash, write_trace
from .types import (
    ABILITIES,
    CAMERA_NAMES,
    CLASS_NAMES,
    COMMANDS,
    AgentState,
    EgoState,
    Infraction,
    LaneGraph,
    Route,
    ScenarioSpec,
    TrafficLight,
    WorldState,
)

__all__ = [
    "ABILITIES", "CAMERA_NAMES", "CLASS_NAMES", "COMMANDS", "AgentState",
    "CompletionTracker", "EgoState", "ExpertPolicy", "Infraction",
    "InfractionTracker", "LaneGraph", "PseudoFrame", "Route", "SCENARIO_KINDS",
    "ScenarioSpec", "Simulator", "TrafficLight", "WorldState",
    "detect_infractions", "make_scenario", "read_trace",
    "render_pseudo_cameras", "rollout", "route_completion", "step",
    "tick_record", "trace_hash", "write_trace",
]
