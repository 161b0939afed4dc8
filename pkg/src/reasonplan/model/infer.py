"""Greedy autoregressive generation with a per-layer key/value cache.

Numpy-only inference twin of the training forward pass: same arithmetic, no
graph. The forced future-image span is self-conditioned: each slot is fed the
model's own predicted latent from the previous position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import ModelConfig
from ..text.vocab import BOI, BOS, EOI, EOS, IMAGE
from .transformer import RMS_EPS


def _np_params(params: dict) -> dict:
    return {k: (v.data if hasattr(v, "data") else v) for k, v in params.items()}


def _rms(x):
    return x / np.sqrt((x * x).mean(axis=-1, keepdims=True) + RMS_EPS)


class _KVCache:
    def __init__(self, layers: int, heads: int, dh: int, capacity: int):
        self.k = np.zeros((layers, heads, capacity, dh))
        self.v = np.zeros((layers, heads, capacity, dh))
        self.n = 0


class InferenceEngine:
    """Incremental forward over one growing sequence."""

    def __init__(self, params: dict, cfg: ModelConfig):
        self.p = _np_params(params)
        self.cfg = cfg
        self.d_p = self.p["tok_emb"].shape[1]
        self.heads = cfg.heads
        self.dh = self.d_p // cfg.heads
        self.scale = 1.0 / math.sqrt(self.dh)
        self.cache = _KVCache(cfg.layers, cfg.heads, self.dh, cfg.max_seq)

    def _embed(self, token_id: int, pos: int, override=None):
        base = self.p["tok_emb"][token_id] if override is None else override
        return base + self.p["pos_emb"][pos]

    def append(self, emb: np.ndarray) -> np.ndarray:
        """Run one embedding row through the stack; returns its hidden row."""
        c = self.cache
        if c.n >= self.cfg.max_seq:
            raise ValueError("sequence exceeded max_seq during generation")
        x = emb
        for i in range(self.cfg.layers):
            ln = _rms(x)
            q = (ln @ self.p[f"blk{i}.wq"]).reshape(self.heads, self.dh)
            k = (ln @ self.p[f"blk{i}.wk"]).reshape(self.heads, self.dh)
            v = (ln @ self.p[f"blk{i}.wv"]).reshape(self.heads, self.dh)
            c.k[i, :, c.n] = k
            c.v[i, :, c.n] = v
            ks = c.k[i, :, :c.n + 1]
            vs = c.v[i, :, :c.n + 1]
            scores = np.einsum("hd,htd->ht", q, ks) * self.scale
            scores -= scores.max(axis=-1, keepdims=True)
            w = np.exp(scores)
            w /= w.sum(axis=-1, keepdims=True)
            att = np.einsum("ht,htd->hd", w, vs).reshape(self.d_p)
            x = x + att @ self.p[f"blk{i}.wo"]
            ln2 = _rms(x)
            x = x + (np.maximum(ln2 @ self.p[f"blk{i}.w1"] + self.p[f"blk{i}.b1"], 0.0)
                     @ self.p[f"blk{i}.w2"] + self.p[f"blk{i}.b2"])
        c.n += 1
        return x

    def append_token(self, token_id: int, override=None) -> np.ndarray:
        return self.append(self._embed(token_id, self.cache.n, override))

    def lm_logits(self, hidden_row: np.ndarray) -> np.ndarray:
        return hidden_row @ self.p["lm_head.w"] + self.p["lm_head.b"]

    def nsp_latent(self, hidden_row: np.ndarray) -> np.ndarray:
        return hidden_row @ self.p["nsp_head.w"] + self.p["nsp_head.b"]


@dataclass
class GenerationResult:
    ids: list                      # generated assistant token ids
    latents: np.ndarray            # self-conditioned latents for the image span
    truncated: bool = False
    hidden_rows: list = field(default_factory=list, repr=False)


def generate(params: dict, input_seq, input_overrides: np.ndarray, n_slots: int,
             cfg: ModelConfig, max_new: int = 400) -> GenerationResult:
    """Greedy decode after the forced [BOS] [BOI] <image>*n [EOI] structure.

    `input_overrides` carries the context row followed by the time-t image
    rows, matching input_seq.context_pos and input_seq.t_slots order.
    """
    eng = InferenceEngine(params, cfg)
    override_at = {int(input_seq.context_pos): input_overrides[0]}
    for j, pos in enumerate(input_seq.t_slots):
        override_at[int(pos)] = input_overrides[1 + j]
    hidden = None
    for pos, token_id in enumerate(input_seq.ids):
        hidden = eng.append_token(int(token_id), override_at.get(pos))

    out_ids = [BOS, BOI]
    hidden = eng.append_token(BOS)
    hidden = eng.append_token(BOI)
    latents = np.zeros((n_slots, eng.d_p))
    for j in range(n_slots):
        latents[j] = eng.nsp_latent(hidden)
        hidden = eng.append_token(IMAGE, override=latents[j])
        out_ids.append(IMAGE)
    hidden = eng.append_token(EOI)
    out_ids.append(EOI)

    truncated = True
    for _ in range(max_new):
        nxt = int(np.argmax(eng.lm_logits(hidden)))
        out_ids.append(nxt)
        if nxt == EOS:
            truncated = False
            break
        hidden = eng.append_token(nxt)
    return GenerationResult(ids=out_ids, latents=latents, truncated=truncated)
