"""Tiny decoder-only transformer with multimodal embedding injection.

Pre-norm blocks with parameter-free RMSNorm; `hidden` is the residual stream
and both heads read it through the standard one-position shift: the
prediction scored at position p comes from hidden[p-1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, concat_rows, place_rows
from ..config import ModelConfig

RMS_EPS = 1e-8

PARAM_GROUPS = {
    "frontend.encoder": ("enc.",),
    "frontend.projector": ("proj.",),
    "frontend.context": ("ctx.",),
    "model.backbone": ("tok_emb", "pos_emb", "blk"),
    "model.lm_head": ("lm_head.",),
    "model.nsp_head": ("nsp_head.",),
}

STAGE_TRAINABLES = {
    1: ("frontend.projector", "frontend.context"),
    2: tuple(PARAM_GROUPS),
}


def group_of(name: str) -> str:
    for group, prefixes in PARAM_GROUPS.items():
        if any(name.startswith(p) for p in prefixes):
            return group
    raise KeyError(f"parameter {name!r} belongs to no group")


def init_model_params(cfg: ModelConfig, d_p: int, vocab_size: int,
                      rng: np.random.Generator) -> dict:
    if d_p % cfg.heads:
        raise ValueError("model dim must divide evenly into heads")

    def p(arr):
        return Tensor(arr, requires_grad=True)

    params = {
        "tok_emb": p(rng.normal(0.0, 0.02, (vocab_size, d_p))),
        "pos_emb": p(rng.normal(0.0, 0.02, (cfg.max_seq, d_p))),
        "lm_head.w": p(rng.normal(0.0, 0.02, (d_p, vocab_size))),
        "lm_head.b": p(np.zeros(vocab_size)),
        "nsp_head.w": p(rng.normal(0.0, 0.02, (d_p, d_p))),
        "nsp_head.b": p(np.zeros(d_p)),
    }
    ff = cfg.ff_mult * d_p
    for i in range(cfg.layers):
        params[f"blk{i}.wq"] = p(rng.normal(0.0, 0.02, (d_p, d_p)))
        params[f"blk{i}.wk"] = p(rng.normal(0.0, 0.02, (d_p, d_p)))
        params[f"blk{i}.wv"] = p(rng.normal(0.0, 0.02, (d_p, d_p)))
        params[f"blk{i}.wo"] = p(rng.normal(0.0, 0.02, (d_p, d_p)))
        params[f"blk{i}.w1"] = p(rng.normal(0.0, 0.02, (d_p, ff)))
        params[f"blk{i}.b1"] = p(np.zeros(ff))
        params[f"blk{i}.w2"] = p(rng.normal(0.0, 0.02, (ff, d_p)))
        params[f"blk{i}.b2"] = p(np.zeros(d_p))
    return params


def rmsnorm(x: Tensor) -> Tensor:
    ms = (x * x).mean(axis=-1, keepdims=True)
    return x / (ms + RMS_EPS).sqrt()


def _causal_mask(n: int) -> np.ndarray:
    mask = np.zeros((n, n))
    mask[np.triu_indices(n, k=1)] = -np.inf
    return mask


def forward_graph(params: dict, ids: np.ndarray, override_pos, override_rows,
                  cfg: ModelConfig) -> Tensor:
    """Residual-stream hidden states (L, D) with injected embeddings.

    `override_rows` is a Tensor whose row k replaces the token embedding at
    position override_pos[k]; positional embeddings still apply everywhere.
    """
    L = len(ids)
    if L > cfg.max_seq:
        raise ValueError(f"sequence length {L} exceeds max_seq {cfg.max_seq}")
    d_p = params["tok_emb"].data.shape[1]
    heads = cfg.heads
    dh = d_p // heads

    emb = params["tok_emb"].rows(ids)
    if override_pos is not None and len(override_pos):
        keep = np.ones((L, 1))
        keep[np.asarray(override_pos, dtype=np.intp)] = 0.0
        emb = emb * Tensor(keep) + place_rows(L, override_pos, override_rows)
    x = emb + params["pos_emb"].rows(np.arange(L))

    mask = Tensor(_causal_mask(L))
    scale = 1.0 / math.sqrt(dh)
    for i in range(cfg.layers):
        ln = rmsnorm(x)
        q = (ln @ params[f"blk{i}.wq"]).reshape(L, heads, dh).swapaxes(0, 1)
        k = (ln @ params[f"blk{i}.wk"]).reshape(L, heads, dh).swapaxes(0, 1)
        v = (ln @ params[f"blk{i}.wv"]).reshape(L, heads, dh).swapaxes(0, 1)
        scores = (q @ k.swapaxes(1, 2)) * scale + mask
        att = scores.softmax() @ v
        x = x + att.swapaxes(0, 1).reshape(L, d_p) @ params[f"blk{i}.wo"]
        ln2 = rmsnorm(x)
        x = x + ((ln2 @ params[f"blk{i}.w1"] + params[f"blk{i}.b1"]).relu()
                 @ params[f"blk{i}.w2"] + params[f"blk{i}.b2"])
    return x


@dataclass
class ForwardOutput:
    logits: np.ndarray            # (L, V); row p scores content AT position p
    hidden: np.ndarray            # (L, D) residual stream
    predicted_latents: np.ndarray # (n_future, D), aligned with future_slots
    future_slots: np.ndarray


def forward(params: dict, seq, override_rows: Tensor, override_pos,
            cfg: ModelConfig) -> ForwardOutput:
    """Inspection-friendly forward pass returning plain arrays."""
    hidden_t = forward_graph(params, seq.ids, override_pos, override_rows, cfg)
    hidden = hidden_t.data
    raw = hidden @ params["lm_head.w"].data + params["lm_head.b"].data
    logits = np.zeros_like(raw)
    logits[1:] = raw[:-1]
    future = np.asarray(seq.future_slots, dtype=np.intp)
    if len(future):
        pred = hidden[future - 1] @ params["nsp_head.w"].data + params["nsp_head.b"].data
    else:
        pred = np.zeros((0, hidden.shape[1]))
    return ForwardOutput(logits=logits, hidden=hidden, predicted_latents=pred,
                         future_slots=future)
