"""Dataset generation: expert rollouts -> sampled reasoning records -> JSONL."""

from __future__ import annotations

import math
from collections import Counter
from pathlib import Path

import numpy as np

from ..config import Config
from ..hashing import canonical_json, file_hash
from ..sim import ExpertPolicy, make_scenario, render_pseudo_cameras, rollout
from .meta_actions import derive_meta_actions
from .records import RECORD_SCHEMA, ReasoningRecord, serialize_record
from .reports import describe_scene, identify_critical_objects, report_signs

STATS_SCHEMA = "reasonplan.dataset_stats.v1"


def _ego_frame(ego, x, y):
    dx, dy = x - ego.x, y - ego.y
    c, s = math.cos(ego.heading), math.sin(ego.heading)
    return (c * dx + s * dy, -s * dx + c * dy)


def records_from_rollout(spec, worlds, cfg: Config, stages=None) -> list[ReasoningRecord]:
    """Sample records along one expert rollout (stride/horizon from config)."""
    ac = cfg.annotate
    stages = tuple(stages) if stages is not None else ("SU", "TS", "CO", "MA")
    last = len(worlds) - 1
    frame_cache: dict = {}

    def frames_at(t):
        if t not in frame_cache:
            frame_cache[t] = render_pseudo_cameras(worlds[t], cfg.sim)
        return frame_cache[t]

    records = []
    t = 0
    while t + ac.future_horizon <= last:
        w = worlds[t]
        s_ego, _ = spec.route.polyline.project(w.ego.x, w.ego.y)
        seg = worlds[t:t + ac.meta_window + 1]
        waypoints = []
        for k in (5, 10, 15, 20):
            fut = worlds[min(t + k, last)]
            waypoints.append(_ego_frame(w.ego, fut.ego.x, fut.ego.y))
        records.append(ReasoningRecord(
            scenario=spec.kind, seed=spec.seed, tick=t,
            v=w.ego.v, a=w.ego.a, cmd=spec.route.command_at(s_ego),
            narration=describe_scene(w, ac),
            signs=report_signs(w, ac),
            critical=identify_critical_objects(w, ac),
            meta=derive_meta_actions(seg, ac),
            waypoints=waypoints,
            frames_t=frames_at(t),
            frames_future=frames_at(t + ac.future_horizon),
            stages=stages,
        ))
        t += ac.sample_stride
    return records


def generate_dataset(scenarios, out_path, cfg: Config | None = None,
                     stages=None, max_records=None):
    """Run expert rollouts for (kind, seed) pairs and write a JSONL dataset.

    Returns (records, stats). Deterministic scenario-then-tick order.
    """
    cfg = cfg or Config()
    records = []
    for kind, seed in scenarios:
        spec = make_scenario(kind, seed)
        worlds = rollout(spec, ExpertPolicy(spec, cfg.sim), cfg.sim.episode_cap, cfg.sim)
        records.extend(records_from_rollout(spec, worlds, cfg, stages=stages))
        if max_records is not None and len(records) >= max_records:
            records = records[:max_records]
            break

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w") as fh:
        for rec in records:
            fh.write(canonical_json(rec.to_dict()) + "\n")

    stats = dataset_stats(records)
    stats["file_hash"] = file_hash(out_path)
    Path(str(out_path) + ".stats.json").write_text(canonical_json(stats) + "\n")
    return records, stats


def dataset_stats(records) -> dict:
    word_counts = []
    vocab = Counter()
    per_scenario = Counter()
    for rec in records:
        text = serialize_record(rec)
        words = text.split()
        word_counts.append(len(words))
        vocab.update(w.strip(".,;:()").lower() for w in words)
        per_scenario[rec.scenario] += 1
    vocab.pop("", None)
    if word_counts:
        hist_edges = [0, 60, 80, 100, 120, 150, 200, 300, 500, 10_000]
        hist = [int(((np.asarray(word_counts) >= lo) & (np.asarray(word_counts) < hi)).sum())
                for lo, hi in zip(hist_edges[:-1], hist_edges[1:])]
        mean_words = float(np.mean(word_counts))
    else:
        hist, mean_words = [], 0.0
    return {
        "schema": STATS_SCHEMA,
        "count": len(records),
        "word_mean": round(mean_words, 3),
        "word_min": min(word_counts) if word_counts else 0,
        "word_max": max(word_counts) if word_counts else 0,
        "word_hist": hist,
        "top_words": vocab.most_common(20),
        "per_scenario": dict(sorted(per_scenario.items())),
    }


def load_dataset(path) -> list[ReasoningRecord]:
    import json

    records = []
    for line in Path(path).read_text().splitlines():
        records.append(ReasoningRecord.from_dict(json.loads(line)))
    return records
