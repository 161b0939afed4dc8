"""Episode traces: one canonical JSON record per tick, hashed with FNV-1a."""

from __future__ import annotations

from pathlib import Path

from ..hashing import FNV_OFFSET, canonical_json, fnv1a64
from .types import WorldState

TRACE_SCHEMA = "reasonplan.trace.v1"


def tick_record(world: WorldState) -> dict:
    return {
        "schema": TRACE_SCHEMA,
        "tick": world.tick,
        "ego": {
            "x": world.ego.x, "y": world.ego.y, "heading": world.ego.heading,
            "v": world.ego.v, "a": world.ego.a, "steer": world.ego.steer,
        },
        "agents": [
            {"id": a.id, "kind": a.kind, "x": a.x, "y": a.y,
             "heading": a.heading, "speed": a.speed, "hx": a.hx, "hy": a.hy}
            for a in world.agents
        ],
        "lights": list(world.light_states),
        "events": list(world.events),
    }


def trace_lines(worlds) -> list[str]:
    return [canonical_json(tick_record(w)) for w in worlds]


def trace_hash(worlds) -> str:
    h = FNV_OFFSET
    for line in trace_lines(worlds):
        h = fnv1a64(line.encode() + b"\n", h)
    return f"{h:016x}"


def write_trace(worlds, path) -> str:
    lines = trace_lines(worlds)
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
    h = FNV_OFFSET
    for line in lines:
        h = fnv1a64(line.encode() + b"\n", h)
    return f"{h:016x}"


def read_trace(path) -> list[dict]:
    import json

    records = []
    for line in Path(path).read_text().splitlines():
        rec = json.loads(line)
        if rec.get("schema") != TRACE_SCHEMA:
            raise ValueError(f"unsupported trace schema {rec.get('schema')!r}")
        records.append(rec)
    return records
