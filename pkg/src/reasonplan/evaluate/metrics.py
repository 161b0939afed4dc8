"""Open-loop L2, per-ability success rates, and run summaries."""

from __future__ import annotations

import math

import numpy as np

from ..config import Config
from ..frontend import encode_context, frontend_features
from ..model import generate
from ..sim.types import ABILITIES
from ..text import (
    GrammarError,
    SequenceLayout,
    TrajectoryArityError,
    TrajectoryParseError,
    assemble_input,
    parse_target_grammar,
    parse_trajectory,
)


def l2_between(pred, label) -> float:
    return float(np.mean([math.hypot(px - lx, py - ly)
                          for (px, py), (lx, ly) in zip(pred, label)]))


def predict_waypoints(params, vocab, rec, cfg: Config):
    """Open-loop prediction from a stored record's frames; None on any fault."""
    layout = SequenceLayout.from_frontend(cfg.frontend)
    feats = frontend_features(rec.frames_t, params, cfg.frontend)
    ctx = encode_context(rec.v, rec.a, rec.cmd, params)
    seq = assemble_input(rec, vocab, layout)
    overrides = np.concatenate([ctx.data, feats.features.data], axis=0)
    result = generate(params, seq, overrides, layout.n_slots, cfg.model,
                      max_new=cfg.eval.max_new_tokens)
    if result.truncated:
        return None
    try:
        _, traj_ids = parse_target_grammar(result.ids, layout.n_slots)
        return parse_trajectory(vocab.decode(traj_ids))
    except (GrammarError, TrajectoryParseError, TrajectoryArityError):
        return None


def open_loop_l2(params, vocab, records, cfg: Config | None = None) -> dict:
    """Mean waypoint L2 against expert labels; parse failures hit the cap."""
    cfg = cfg or Config()
    dists = []
    failures = 0
    for rec in records:
        pred = predict_waypoints(params, vocab, rec, cfg)
        if pred is None:
            failures += 1
            dists.append(cfg.eval.l2_parse_fail_cap)
        else:
            dists.append(l2_between(pred, rec.waypoints))
    return {
        "l2_mean": float(np.mean(dists)) if dists else 0.0,
        "count": len(records),
        "parse_failures": failures,
        "fail_cap": cfg.eval.l2_parse_fail_cap,
    }


def ability_report(results) -> dict:
    """Per-class success percentages plus their arithmetic mean."""
    if not results:
        raise ValueError("no episode results")
    per_class: dict = {}
    for r in results:
        per_class.setdefault(r.ability, []).append(1.0 if r.success else 0.0)
    rates = {cls: 100.0 * float(np.mean(vals)) for cls, vals in per_class.items()
             if cls in ABILITIES}
    mean = float(np.mean(list(rates.values()))) if rates else 0.0
    return {"per_class": dict(sorted(rates.items())), "mean": mean}


def summarize_episodes(results) -> dict:
    """Aggregate driving score is the mean of per-episode DS values."""
    if not results:
        raise ValueError("no episode results")
    return {
        "schema": "reasonplan.summary.v1",
        "episodes": len(results),
        "driving_score": float(np.mean([r.driving_score for r in results])),
        "route_completion": float(np.mean([r.rc for r in results])),
        "infraction_score": float(np.mean([r.infraction_score for r in results])),
        "success_rate": 100.0 * float(np.mean([1.0 if r.success else 0.0 for r in results])),
        "efficiency": float(np.mean([r.efficiency for r in results])),
        "comfort": float(np.mean([r.comfort for r in results])),
        "planner_faults": int(sum(r.planner_faults for r in results)),
        "ability": ability_report(results),
        "penalties": results[0].penalties,
    }
