"""Visual frontend: grid partitioning, the learned patch encoder standing in
for a pretrained backbone, the two-layer projection into the text embedding
space, and the ego-context encoder. Everything is a pure function of
(inputs, params) built on the autodiff tensors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, concat_rows
from ..config import FrontendConfig
from ..sim.types import COMMANDS, N_CLASSES

GRID_ORDER_VIEWS = 6          # resized views first (front leading) ...
GRID_ORDER_SUBGRIDS = 4       # ... then the four front quadrants
N_GRIDS = GRID_ORDER_VIEWS + GRID_ORDER_SUBGRIDS


@dataclass
class ProjectedFeatures:
    features: Tensor          # (n_grids * l_v, d_p)
    front_rows: np.ndarray    # token rows derived from the front camera
    n_grids: int
    l_v: int


def resize_nearest(raster: np.ndarray, size: int) -> np.ndarray:
    h, w = raster.shape
    ri = (np.arange(size) * h) // size
    ci = (np.arange(size) * w) // size
    return raster[np.ix_(ri, ci)]


def anyres_partition(frames, cfg: FrontendConfig) -> list:
    """6 resized views (front first) plus the 2x2 split of the front view."""
    if len(frames) != 6:
        raise ValueError(f"expected 6 camera frames, got {len(frames)}")
    by_name = {f.camera: f for f in frames}
    if "CAM_FRONT" not in by_name:
        raise ValueError("front camera missing")
    order = ("CAM_FRONT", "CAM_FRONT_LEFT", "CAM_FRONT_RIGHT",
             "CAM_BACK_LEFT", "CAM_BACK_RIGHT", "CAM_BACK")
    grids = [resize_nearest(by_name[name].raster, cfg.grid_size) for name in order]
    front = by_name["CAM_FRONT"].raster
    h2, w2 = front.shape[0] // 2, front.shape[1] // 2
    quads = (front[:h2, :w2], front[:h2, w2:], front[h2:, :w2], front[h2:, w2:])
    grids.extend(resize_nearest(q, cfg.grid_size) for q in quads)
    return grids


def front_row_index(cfg: FrontendConfig) -> np.ndarray:
    """Token rows fed by the front camera: resized front grid + 4 sub-grids."""
    l_v = cfg.l_v
    rows = list(range(l_v))
    for g in range(GRID_ORDER_VIEWS, N_GRIDS):
        rows.extend(range(g * l_v, (g + 1) * l_v))
    return np.asarray(rows, dtype=np.intp)


def init_frontend_params(cfg: FrontendConfig, rng: np.random.Generator) -> dict:
    l_v = cfg.l_v
    patch_dim = cfg.patch * cfg.patch * cfg.n_classes

    def p(arr):
        return Tensor(arr, requires_grad=True)

    return {
        "enc.embed_w": p(rng.normal(0.0, 0.02, (patch_dim, cfg.d_v))),
        "enc.embed_b": p(np.zeros(cfg.d_v)),
        "enc.mix": p(np.eye(l_v) + rng.normal(0.0, 0.02, (l_v, l_v))),
        "proj.w1": p(rng.normal(0.0, 0.02, (cfg.d_v, cfg.d_p))),
        "proj.b1": p(np.zeros(cfg.d_p)),
        "proj.w2": p(rng.normal(0.0, 0.02, (cfg.d_p, cfg.d_p))),
        "proj.b2": p(np.zeros(cfg.d_p)),
        "ctx.w1": p(rng.normal(0.0, 0.02, (2 + len(COMMANDS), cfg.d_p))),
        "ctx.b1": p(np.zeros(cfg.d_p)),
        "ctx.w2": p(rng.normal(0.0, 0.02, (cfg.d_p, cfg.d_p))),
        "ctx.b2": p(np.zeros(cfg.d_p)),
    }


def _patch_onehot(grid: np.ndarray, cfg: FrontendConfig) -> np.ndarray:
    g, p = cfg.grid_size, cfg.patch
    if grid.shape != (g, g):
        raise ValueError(f"grid shape {grid.shape} != ({g}, {g})")
    n = g // p
    patches = grid.reshape(n, p, n, p).transpose(0, 2, 1, 3).reshape(n * n, p * p)
    onehot = np.zeros((n * n, p * p, cfg.n_classes))
    idx = np.indices(patches.shape)
    onehot[idx[0], idx[1], patches] = 1.0
    return onehot.reshape(n * n, p * p * cfg.n_classes)


def encode_grid(grid: np.ndarray, params: dict, cfg: FrontendConfig) -> Tensor:
    """Patch one-hot embedding with a learned cross-patch mix: (l_v, d_v)."""
    onehot = Tensor(_patch_onehot(grid, cfg))
    embedded = onehot @ params["enc.embed_w"] + params["enc.embed_b"]
    return params["enc.mix"] @ embedded


def project(feature_grid: Tensor, params: dict) -> Tensor:
    """Two affine layers with a ramp between: (l_v, d_v) -> (l_v, d_p)."""
    hidden = (feature_grid @ params["proj.w1"] + params["proj.b1"]).relu()
    return hidden @ params["proj.w2"] + params["proj.b2"]


def encode_context(v: float, a: float, cmd: str, params: dict) -> Tensor:
    """Ego speed/acceleration/command -> one text-space embedding row."""
    if cmd not in COMMANDS:
        raise ValueError(f"unknown navigation command {cmd!r}")
    if not (np.isfinite(v) and np.isfinite(a)):
        raise ValueError("non-finite ego context")
    x = np.zeros((1, 2 + len(COMMANDS)))
    x[0, 0] = v
    x[0, 1] = a
    x[0, 2 + COMMANDS.index(cmd)] = 1.0
    hidden = (Tensor(x) @ params["ctx.w1"] + params["ctx.b1"]).relu()
    return hidden @ params["ctx.w2"] + params["ctx.b2"]


def frontend_features(frames, params: dict, cfg: FrontendConfig) -> ProjectedFeatures:
    """Full path: partition, encode, and project all grids of one frame set."""
    grids = anyres_partition(frames, cfg)
    projected = [project(encode_grid(g, params, cfg), params) for g in grids]
    return ProjectedFeatures(features=concat_rows(projected),
                             front_rows=front_row_index(cfg),
                             n_grids=len(grids), l_v=cfg.l_v)
