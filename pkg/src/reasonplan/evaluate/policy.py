"""Model-driven driving policy: render, assemble, generate, parse, track."""

from __future__ import annotations

import math

import numpy as np

from ..config import Config
from ..frontend import encode_context, frontend_features
from ..model import generate
from ..sim import render_pseudo_cameras
from ..text import (
    GrammarError,
    SequenceLayout,
    TrajectoryArityError,
    TrajectoryParseError,
    Vocab,
    assemble_input,
    parse_target_grammar,
)
from .controller import FALLBACK_DECEL, track


class _PlanRecord:
    """Minimal record-shaped view of the live world for input assembly."""

    def __init__(self, world):
        route = world.route
        s_ego, _ = route.polyline.project(world.ego.x, world.ego.y)
        self.v = world.ego.v
        self.a = world.ego.a
        self.cmd = route.command_at(s_ego)


def plan_step(params, vocab: Vocab, world, cfg: Config):
    """One open-loop plan: returns (waypoints, fault_reason_or_None)."""
    layout = SequenceLayout.from_frontend(cfg.frontend)
    frames = render_pseudo_cameras(world, cfg.sim)
    feats = frontend_features(frames, params, cfg.frontend)
    rec = _PlanRecord(world)
    ctx = encode_context(rec.v, rec.a, rec.cmd, params)
    seq = assemble_input(rec, vocab, layout)
    overrides = np.concatenate([ctx.data, feats.features.data], axis=0)
    result = generate(params, seq, overrides, layout.n_slots, cfg.model,
                      max_new=cfg.eval.max_new_tokens)
    if result.truncated:
        return None, "truncated"
    try:
        _, traj_ids = parse_target_grammar(result.ids, layout.n_slots)
        text = vocab.decode(traj_ids)
        from ..text import parse_trajectory
        points = parse_trajectory(text)
    except (GrammarError, TrajectoryParseError, TrajectoryArityError) as exc:
        return None, type(exc).__name__
    if not all(math.isfinite(x) and math.isfinite(y) for x, y in points):
        return None, "non_finite"
    return points, None


class ModelPolicy:
    """Closed-loop policy: replans every `replan_ticks`, tracks in between.

    On a planner fault it holds the last valid plan and decelerates.
    """

    def __init__(self, params, vocab: Vocab, cfg: Config):
        self.params = params
        self.vocab = vocab
        self.cfg = cfg
        self.plan_pose = None        # (x, y, heading) at plan time
        self.plan_points = None      # ego-frame waypoints of the last plan
        self.faults: list = []
        self._countdown = 0

    def _world_points(self):
        x0, y0, h0 = self.plan_pose
        c, s = math.cos(h0), math.sin(h0)
        return [(x0 + c * px - s * py, y0 + s * px + c * py)
                for px, py in self.plan_points]

    def _relative_points(self, ego):
        c, s = math.cos(ego.heading), math.sin(ego.heading)
        out = []
        for wx, wy in self._world_points():
            dx, dy = wx - ego.x, wy - ego.y
            out.append((c * dx + s * dy, -s * dx + c * dy))
        return out

    def __call__(self, world):
        fault = None
        if self._countdown <= 0:
            points, fault = plan_step(self.params, self.vocab, world, self.cfg)
            self._countdown = self.cfg.eval.replan_ticks
            if points is not None:
                self.plan_points = points
                self.plan_pose = (world.ego.x, world.ego.y, world.ego.heading)
            else:
                self.faults.append({"tick": world.tick, "reason": fault})
        self._countdown -= 1

        if self.plan_points is None:
            return FALLBACK_DECEL, 0.0
        accel, steer = track(world.ego, self._relative_points(world.ego), self.cfg.sim)
        if fault is not None:
            accel = min(accel, FALLBACK_DECEL)
        return accel, steer
