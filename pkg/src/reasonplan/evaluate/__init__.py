from .controller import FALLBACK_DECEL, track
from .episode import EpisodeResult, infraction_score, penalty_table, run_episode
from .metrics import (
    ability_report,
    l2_between,
    open_loop_l2,
    predict_waypoints,
    summarize_episodes,
)
from .policy import ModelPolicy, plan_step

__all__ = [
    "EpisodeResult", "FALLBACK_DECEL", "ModelPolicy", "ability_report",
    "infraction_score", "l2_between", "open_loop_l2", "penalty_table",
    "plan_step", "predict_waypoints", "run_episode", "summarize_episodes",
    "track",
]
