"""Reasoning records and their deterministic English serialization.

One record = ego context + current/future pseudo-frames + the four annotation
stages + the expert trajectory label. Serialization is templated so the same
record always produces byte-identical text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..sim.render import PseudoFrame
from .meta_actions import MetaAction
from .reports import CriticalObjectReport, SceneNarration, SignReport

STAGE_CODES = ("SU", "TS", "CO", "MA")
STAGE_TITLES = {
    "SU": "Scene Understanding",
    "TS": "Traffic Sign Recognition",
    "CO": "Critical Object Identification for Risk Assessment",
    "MA": "Meta Action",
}

RECORD_SCHEMA = "reasonplan.record.v1"


@dataclass
class ReasoningRecord:
    scenario: str
    seed: int
    tick: int
    v: float
    a: float
    cmd: str
    narration: SceneNarration
    signs: SignReport
    critical: CriticalObjectReport
    meta: MetaAction
    waypoints: list              # 4 (x, y) pairs in the ego frame
    frames_t: list               # 6 PseudoFrame
    frames_future: list          # 6 PseudoFrame, 3 s later
    stages: tuple = STAGE_CODES

    def to_dict(self) -> dict:
        return {
            "schema": RECORD_SCHEMA,
            "scenario": self.scenario,
            "seed": self.seed,
            "tick": self.tick,
            "ego": {"v": round(self.v, 6), "a": round(self.a, 6), "cmd": self.cmd},
            "narration": self.narration.to_dict(),
            "signs": self.signs.to_dict(),
            "critical": self.critical.to_dict(),
            "meta": self.meta.to_dict(),
            "waypoints": [[round(x, 6), round(y, 6)] for x, y in self.waypoints],
            "frames_t": [encode_frame(f) for f in self.frames_t],
            "frames_future": [encode_frame(f) for f in self.frames_future],
            "stages": list(self.stages),
            "text": serialize_record(self),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReasoningRecord":
        if d.get("schema") != RECORD_SCHEMA:
            raise ValueError(f"unsupported record schema {d.get('schema')!r}")
        return cls(
            scenario=d["scenario"], seed=d["seed"], tick=d["tick"],
            v=d["ego"]["v"], a=d["ego"]["a"], cmd=d["ego"]["cmd"],
            narration=SceneNarration.from_dict(d["narration"]),
            signs=SignReport.from_dict(d["signs"]),
            critical=CriticalObjectReport.from_dict(d["critical"]),
            meta=MetaAction(**d["meta"]),
            waypoints=[tuple(p) for p in d["waypoints"]],
            frames_t=[decode_frame(f) for f in d["frames_t"]],
            frames_future=[decode_frame(f) for f in d["frames_future"]],
            stages=tuple(d["stages"]),
        )


def encode_frame(frame: PseudoFrame) -> dict:
    flat = frame.raster.reshape(-1)
    runs = []
    val = int(flat[0])
    count = 0
    for cell in flat:
        cell = int(cell)
        if cell == val:
            count += 1
        else:
            runs.append([val, count])
            val, count = cell, 1
    runs.append([val, count])
    return {"camera": frame.camera, "h": frame.raster.shape[0],
            "w": frame.raster.shape[1], "rle": runs}


def decode_frame(d: dict) -> PseudoFrame:
    flat = np.concatenate([np.full(n, v, dtype=np.uint8) for v, n in d["rle"]])
    return PseudoFrame(camera=d["camera"], raster=flat.reshape(d["h"], d["w"]))


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _su_text(rec: ReasoningRecord) -> str:
    n = rec.narration
    moves = ", ".join(f"{c.maneuver} via {c.target_lane}" for c in n.candidates)
    return (
        f"{STAGE_TITLES['SU']}: The ego vehicle is driving in a {n.scene_kind} context "
        f"on lane {n.current_lane} of a road with {n.lane_count} connected "
        f"{'lane' if n.lane_count == 1 else 'lanes'}. It moves at {_fmt(rec.v)} m/s with "
        f"acceleration {_fmt(rec.a)} m/s2 under navigation command {rec.cmd}. "
        f"Feasible candidate routes are: {moves}."
    )


def _ts_text(rec: ReasoningRecord) -> str:
    entries = rec.signs.entries
    if not entries:
        body = ("No traffic lights, warning signs, or construction indicators govern "
                "the route within sensing range, so signals impose no constraint on the plan.")
    else:
        parts = []
        for e in entries:
            if e.sign_kind == "traffic_light":
                parts.append(f"a traffic light showing {e.state} at {_fmt(e.distance)} m ahead")
            else:
                parts.append(f"a {e.sign_kind} sign posted {_fmt(e.distance)} m ahead")
        body = ("The route is governed by " + "; ".join(parts) +
                ". The plan must respect these indications.")
    return f"{STAGE_TITLES['TS']}: {body}"


def _co_text(rec: ReasoningRecord) -> str:
    entries = rec.critical.entries
    if not entries:
        body = ("No critical objects occupy the interactive lanes within range, "
                "so the planned maneuver faces no interaction risk.")
    else:
        parts = []
        for e in entries:
            parts.append(
                f"object {e.agent_id} ({e.kind}) at longitudinal {_fmt(e.longitudinal)} m, "
                f"lateral {_fmt(e.lateral)} m, moving at {_fmt(e.speed)} m/s, "
                f"interaction {e.interaction}")
        body = ("The following objects require attention: " + "; ".join(parts) +
                ". Risk assessment conditions the maneuver on these interactions.")
    return f"{STAGE_TITLES['CO']}: {body}"


def _ma_text(rec: ReasoningRecord) -> str:
    m = rec.meta
    return (
        f"{STAGE_TITLES['MA']}: The selected lateral primitive is {m.lateral} and the "
        f"longitudinal primitive is {m.longitudinal}, so the ego vehicle executes "
        f"{m.lateral} while applying {m.longitudinal}."
    )


_STAGE_FNS = {"SU": _su_text, "TS": _ts_text, "CO": _co_text, "MA": _ma_text}


def serialize_reasoning(rec: ReasoningRecord, stages=None) -> str:
    """Stage blocks (no trajectory), in canonical stage order."""
    stages = tuple(stages) if stages is not None else rec.stages
    unknown = set(stages) - set(STAGE_CODES)
    if unknown:
        raise ValueError(f"unknown stage codes {sorted(unknown)}")
    ordered = [s for s in STAGE_CODES if s in stages]
    return "\n".join(_STAGE_FNS[s](rec) for s in ordered)


def trajectory_line(waypoints) -> str:
    pts = ", ".join(f"({_fmt(x)}, {_fmt(y)})" for x, y in waypoints)
    return f"Trajectory: {pts}"


def serialize_record(rec: ReasoningRecord, stages=None) -> str:
    """Full training text: stage blocks followed by the trajectory line."""
    return serialize_reasoning(rec, stages) + "\n" + trajectory_line(rec.waypoints)
