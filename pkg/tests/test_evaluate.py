import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import parked, straight_spec
from reasonplan.config import Config
from reasonplan.evaluate import (
    EpisodeResult,
    ability_report,
    infraction_score,
    l2_between,
    open_loop_l2,
    penalty_table,
    run_episode,
    summarize_episodes,
    track,
)
from reasonplan.evaluate import metrics as metrics_mod
from reasonplan.sim import ExpertPolicy, Infraction, make_scenario
from reasonplan.sim.types import EgoState


def _ego(v=6.0):
    return EgoState(x=0.0, y=0.0, heading=0.0, v=v)


def test_track_straight_waypoints_zero_steer():
    wps = [(3.0, 0.0), (6.0, 0.0), (9.0, 0.0), (12.0, 0.0)]
    accel, steer = track(_ego(6.0), wps)
    assert abs(steer) < 1e-6
    assert abs(accel) < 1e-6  # second point at 6 m -> implied speed matches


def test_track_origin_waypoints_full_brake():
    cfg = Config().sim
    accel, steer = track(_ego(5.0), [(0.0, 0.0)] * 4, cfg)
    assert accel == cfg.accel_min
    assert steer == 0.0


def test_track_left_arc_steers_left():
    wps = [(3.0, 0.4), (5.8, 1.5), (8.0, 3.2), (9.5, 5.2)]
    _, steer = track(_ego(6.0), wps)
    assert steer > 0.0


def test_track_bounded_actions(rng):
    cfg = Config().sim
    for _ in range(100):
        wps = [tuple(rng.uniform(-20, 20, size=2)) for _ in range(4)]
        accel, steer = track(_ego(rng.uniform(0, 12)), wps, cfg)
        assert cfg.accel_min <= accel <= cfg.accel_max
        assert -cfg.steer_max <= steer <= cfg.steer_max


def test_track_requires_four_points():
    with pytest.raises(ValueError):
        track(_ego(), [(1.0, 0.0)])


def test_expert_episode_scores_perfect():
    cfg = Config()
    spec = make_scenario("give_way", 0)
    result, _ = run_episode(spec, ExpertPolicy(spec, cfg.sim), cfg)
    assert result.rc == 1.0
    assert result.infraction_score == 1.0
    assert result.driving_score == 100.0
    assert result.success
    assert result.ticks <= cfg.eval.timeout_ticks


def test_single_pedestrian_collision_halves_is():
    # drive blindly into a pedestrian standing in the lane
    cfg = Config()
    spec = straight_spec(ego_v=7.0, length=60.0,
                         agents=[parked(0, 30.0, 0.0, kind="pedestrian",
                                        hx=0.35, hy=0.35)])
    result, _ = run_episode(spec, lambda w: (0.0, 0.0), cfg)
    assert [i["kind"] for i in result.infractions] == ["collision_pedestrian"]
    assert result.infraction_score == 0.50
    assert result.driving_score == pytest.approx(100.0 * result.rc * 0.50, abs=1e-9)
    assert not result.success


def test_stationary_policy_result():
    cfg = Config()
    cfg.eval.blocked_ticks = 50
    spec = straight_spec(ego_v=0.0, length=80.0)
    result, _ = run_episode(spec, lambda w: (0.0, 0.0), cfg)
    assert result.rc < 0.02
    assert not result.success
    assert result.comfort == 100.0
    assert result.ticks <= 60


def test_ds_identity_randomized(rng):
    penalties = penalty_table(Config().eval)
    kinds = list(penalties)
    for _ in range(120):
        infs = [Infraction(kind=str(rng.choice(kinds)), tick=int(t), agent_id=int(t))
                for t in range(rng.integers(0, 4))]
        rc = float(rng.uniform(0, 1))
        score = infraction_score(infs, penalties)
        ds = 100.0 * rc * score
        assert abs(ds - 100.0 * rc * score) < 1e-9
        expected = 1.0
        for i in infs:
            expected *= penalties[i.kind]
        assert score == pytest.approx(expected, abs=1e-12)


def test_is_order_invariant(rng):
    penalties = penalty_table(Config().eval)
    infs = [Infraction(kind=k, tick=i, agent_id=i)
            for i, k in enumerate(["red_light", "collision_vehicle", "off_road"])]
    base = infraction_score(infs, penalties)
    for _ in range(5):
        perm = [infs[i] for i in rng.permutation(3)]
        assert infraction_score(perm, penalties) == base


def test_aggregate_ds_is_mean_of_episode_ds():
    penalties = penalty_table(Config().eval)

    def res(rc, score, ability="Merging"):
        return EpisodeResult(
            scenario="s", kind="k", seed=0, ability=ability, rc=rc,
            infraction_score=score, driving_score=100.0 * rc * score,
            success=rc == 1.0 and score == 1.0, infractions=[], efficiency=100.0,
            comfort=100.0, ticks=100, trace_hash="0" * 16, penalties=penalties)

    episodes = [res(1.0, 0.5), res(0.5, 1.0)]
    summary = summarize_episodes(episodes)
    assert summary["driving_score"] == pytest.approx(50.0)
    # the wrong aggregation (mean RC x mean IS) would give 56.25
    wrong = 100.0 * np.mean([0.5, 1.0]) * np.mean([1.0, 0.5])
    assert abs(summary["driving_score"] - wrong) > 5.0


def test_success_implies_ds_100():
    penalties = penalty_table(Config().eval)
    r = EpisodeResult(scenario="s", kind="k", seed=0, ability="Merging", rc=1.0,
                      infraction_score=1.0, driving_score=100.0, success=True,
                      infractions=[], efficiency=100.0, comfort=100.0, ticks=10,
                      trace_hash="0" * 16, penalties=penalties)
    assert r.success and r.driving_score == 100.0


def test_l2_between_trivials():
    label = [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]
    assert l2_between(label, label) == 0.0
    shifted = [(x + 1.0, y) for x, y in label]
    assert l2_between(shifted, label) == pytest.approx(1.0)


def test_open_loop_l2_mixed_batch(monkeypatch, rng):
    cfg = Config()

    class Rec:
        waypoints = [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]

    preds = iter([Rec.waypoints, [(x + 1.0, y) for x, y in Rec.waypoints]])
    monkeypatch.setattr(metrics_mod, "predict_waypoints",
                        lambda *a, **k: next(preds))
    report = open_loop_l2(None, None, [Rec(), Rec()], cfg)
    assert report["l2_mean"] == pytest.approx(0.5)
    assert report["parse_failures"] == 0


def test_open_loop_l2_parse_failure_capped(monkeypatch):
    cfg = Config()

    class Rec:
        waypoints = [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]

    monkeypatch.setattr(metrics_mod, "predict_waypoints", lambda *a, **k: None)
    report = open_loop_l2(None, None, [Rec()], cfg)
    assert report["l2_mean"] == cfg.eval.l2_parse_fail_cap
    assert report["parse_failures"] == 1


def _result(ability, success):
    penalties = penalty_table(Config().eval)
    return EpisodeResult(scenario="s", kind="k", seed=0, ability=ability,
                         rc=1.0, infraction_score=1.0,
                         driving_score=100.0 if success else 40.0,
                         success=success, infractions=[], efficiency=100.0,
                         comfort=100.0, ticks=10, trace_hash="0" * 16,
                         penalties=penalties)


def test_ability_report_means():
    results = [_result("Merging", True), _result("Overtaking", True)]
    rep = ability_report(results)
    assert rep["per_class"] == {"Merging": 100.0, "Overtaking": 100.0}
    assert rep["mean"] == 100.0

    results = [_result("Merging", True), _result("Merging", False),
               _result("Overtaking", True)]
    rep = ability_report(results)
    assert rep["per_class"]["Merging"] == 50.0
    assert rep["mean"] == pytest.approx(75.0)
    # absent classes are excluded from the mean
    assert "GiveWay" not in rep["per_class"]


def test_ability_report_empty_rejected():
    with pytest.raises(ValueError):
        ability_report([])


def test_efficiency_follows_neighbor_ratio():
    # lead vehicle at half the ego speed inside the neighbor radius
    from reasonplan.sim.types import AgentScript, AgentState
    cfg = Config()
    cfg.eval.blocked_ticks = 400
    lead = AgentState(id=0, kind="vehicle", x=18.0, y=0.0, heading=0.0,
                      speed=3.0, hx=2.2, hy=0.95)
    script = AgentScript(behavior="path_drive", path=((18.0, 0.0), (500.0, 0.0)),
                         cruise_speed=3.0)
    spec = straight_spec(ego_v=6.0, length=120.0, agents=[(lead, script)])

    def hold_speed(world):
        return (0.0, 0.0)

    result, _ = run_episode(spec, hold_speed, cfg)
    assert result.efficiency == pytest.approx(200.0, abs=15.0)  # capped ratio
