"""Run configuration: every tunable lives here, keyed as `section.field`.

Config files are flat `key = value` lines (# comments allowed). Unknown keys
are rejected so typos fail loudly. The resolved config is embedded in every
manifest a command writes.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from .hashing import canonical_json, fnv1a64_hex


@dataclass
class SimConfig:
    dt: float = 0.1                   # 10 Hz tick
    episode_cap: int = 2000
    wheelbase: float = 2.8
    accel_min: float = -8.0
    accel_max: float = 3.0
    steer_max: float = 0.6
    speed_max: float = 15.0
    offroad_margin: float = 2.5       # off-road = farther than this from every drivable centerline
    camera_fov_deg: float = 70.0
    camera_range: float = 50.0
    raster_w: int = 32
    raster_h: int = 32
    route_marker_halfwidth: float = 1.0
    light_halfwidth: float = 0.8


@dataclass
class FrontendConfig:
    grid_size: int = 16               # cells per grid side after resize
    patch: int = 4                    # patch side; l_v = (grid_size/patch)^2
    d_v: int = 32
    d_p: int = 64
    n_classes: int = 9

    @property
    def l_v(self) -> int:
        return (self.grid_size // self.patch) ** 2


@dataclass
class AnnotateConfig:
    smoothing_alpha: float = 0.3
    accel_threshold: float = 0.4
    emergency_threshold: float = -3.0
    stop_speed: float = 0.1
    turn_heading_deg: float = 60.0
    headway_s: float = 3.0
    object_range: float = 50.0
    sign_range: float = 50.0
    sample_stride: int = 5            # ticks between dataset samples
    future_horizon: int = 30          # ticks to the future frame set (3 s)
    meta_window: int = 20             # ticks of expert segment feeding meta actions


@dataclass
class ModelConfig:
    layers: int = 2
    heads: int = 2
    ff_mult: int = 4
    max_seq: int = 1024


@dataclass
class TrainConfig:
    lambda_image: float = 1.0
    lambda_text: float = 1.0
    lr: float = 5e-5
    batch_size: int = 4
    stage1_epochs: int = 1
    stage2_epochs: int = 3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0


@dataclass
class EvalConfig:
    penalty_collision_pedestrian: float = 0.50
    penalty_collision_vehicle: float = 0.60
    penalty_collision_static: float = 0.65
    penalty_red_light: float = 0.70
    penalty_off_road: float = 0.70
    replan_ticks: int = 5
    timeout_ticks: int = 2000
    blocked_ticks: int = 200
    l2_parse_fail_cap: float = 5.0
    comfort_accel: float = 3.0
    comfort_jerk: float = 5.0
    efficiency_cap: float = 200.0
    neighbor_radius: float = 20.0
    max_new_tokens: int = 400


@dataclass
class Config:
    sim: SimConfig = field(default_factory=SimConfig)
    frontend: FrontendConfig = field(default_factory=FrontendConfig)
    annotate: AnnotateConfig = field(default_factory=AnnotateConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def to_flat(self) -> dict:
        flat = {}
        for sec_field in dataclasses.fields(self):
            sec = getattr(self, sec_field.name)
            for f in dataclasses.fields(sec):
                flat[f"{sec_field.name}.{f.name}"] = getattr(sec, f.name)
        return flat

    def set_key(self, key: str, raw) -> None:
        section, _, name = key.partition(".")
        if not hasattr(self, section):
            raise KeyError(f"unknown config section: {key!r}")
        sec = getattr(self, section)
        fields = {f.name: f for f in dataclasses.fields(sec)}
        if name not in fields:
            raise KeyError(f"unknown config key: {key!r}")
        kind = fields[name].type
        value = raw
        if isinstance(raw, str):
            if kind == "int":
                value = int(raw)
            elif kind == "float":
                value = float(raw)
            else:
                value = raw
        setattr(sec, name, value)

    def hash(self) -> str:
        return fnv1a64_hex(canonical_json(self.to_flat()).encode())

    def save(self, path) -> None:
        lines = [f"{k} = {v}" for k, v in sorted(self.to_flat().items())]
        Path(path).write_text("\n".join(lines) + "\n")


def load_config(path=None, overrides: dict | None = None) -> Config:
    """Build a Config from an optional file plus `key=value` overrides.

    REASONPLAN_SEED, when set, wins over both the file and the overrides.
    """
    cfg = Config()
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            cfg.set_key(key.strip(), raw.strip())
    for key, raw in (overrides or {}).items():
        cfg.set_key(key, raw)
    env_seed = os.environ.get("REASONPLAN_SEED")
    if env_seed is not None:
        cfg.train.seed = int(env_seed)
    return cfg
