"""Two-stage training: sample graphs, reverse-mode gradients, Adam, logging.

Stage 1 trains the projection module and context encoder against
perception-only targets; stage 2 inherits the weights and fine-tunes
everything against the full reasoning targets.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..autodiff import Tensor, concat_rows, cross_entropy_mean
from ..config import Config
from ..frontend import encode_context, frontend_features, init_frontend_params
from ..model import (
    STAGE_TRAINABLES,
    forward_graph,
    group_of,
    init_model_params,
    save_checkpoint,
)
from ..text import SequenceLayout, Vocab, assemble_input, assemble_target, concat_sequences
from ..annotate.records import serialize_reasoning, trajectory_line

STAGE1_STAGES = ("SU", "TS")
METRICS_SCHEMA = "reasonplan.metrics.v1"


class NumericError(RuntimeError):
    """A loss term went non-finite; training aborted at the last good step."""


def stage1_targets(rec):
    """Perception-only supervision: scene + sign blocks, empty trajectory."""
    stages = tuple(s for s in STAGE1_STAGES if s in rec.stages)
    return serialize_reasoning(rec, stages), ""


def stage2_targets(rec):
    return serialize_reasoning(rec, rec.stages), trajectory_line(rec.waypoints)


@dataclass
class TrainSample:
    rec: object
    seqs: dict = field(default_factory=dict)   # stage -> concatenated TokenSequence


def prepare_samples(records, vocab: Vocab, layout: SequenceLayout) -> list:
    samples = []
    for rec in records:
        inp = assemble_input(rec, vocab, layout)
        front_rows = np.asarray(
            list(range(layout.l_v))
            + [r for g in range(6, layout.n_grids)
               for r in range(g * layout.l_v, (g + 1) * layout.l_v)],
            dtype=np.intp)
        seqs = {}
        for stage, (reasoning, traj) in ((1, stage1_targets(rec)), (2, stage2_targets(rec))):
            tgt = assemble_target(reasoning, traj, vocab, layout, front_rows)
            seqs[stage] = concat_sequences(inp, tgt)
        samples.append(TrainSample(rec=rec, seqs=seqs))
    return samples


def sample_losses(params: dict, sample: TrainSample, stage: int, cfg: Config):
    """Graph-building forward: returns (loss_image, loss_text) Tensors."""
    fcfg, mcfg = cfg.frontend, cfg.model
    rec = sample.rec
    seq = sample.seqs[stage]

    feats_t = frontend_features(rec.frames_t, params, fcfg)
    feats_f = frontend_features(rec.frames_future, params, fcfg)
    ctx = encode_context(rec.v, rec.a, rec.cmd, params)

    override_pos = np.concatenate([
        np.asarray([seq.context_pos], dtype=np.intp), seq.t_slots, seq.future_slots])
    override_rows = concat_rows([ctx, feats_t.features, feats_f.features])
    hidden = forward_graph(params, seq.ids, override_pos, override_rows, mcfg)

    # text loss: the prediction scored at position p reads hidden[p-1]
    pos = np.flatnonzero(seq.text_mask)
    logit_rows = hidden.rows(pos - 1) @ params["lm_head.w"] + params["lm_head.b"]
    l_text = cross_entropy_mean(logit_rows, seq.ids[pos])

    # image loss: front-view rows of the future latents only
    pred = hidden.rows(seq.future_slots - 1) @ params["nsp_head.w"] + params["nsp_head.b"]
    front = feats_f.front_rows
    diff = pred.rows(front) - feats_f.features.rows(front)
    l_image = (diff * diff).mean()
    return l_image, l_text


def zero_grads(params: dict) -> None:
    for t in params.values():
        t.grad = None


def collect_grads(params: dict, trainable_groups) -> dict:
    """Gradient arrays per parameter; untrained groups forced to exact zero."""
    grads = {}
    for name, t in params.items():
        g = t.grad if t.grad is not None else np.zeros_like(t.data)
        if group_of(name) not in trainable_groups:
            g = np.zeros_like(t.data)
        grads[name] = g
    return grads


def loss_and_grads(params: dict, samples, stage: int, cfg: Config):
    """Batch losses and gradients (mean over samples, fixed order)."""
    zero_grads(params)
    li_sum, lt_sum = 0.0, 0.0
    lam1, lam2 = cfg.train.lambda_image, cfg.train.lambda_text
    scale = 1.0 / len(samples)
    for sample in samples:
        l_image, l_text = sample_losses(params, sample, stage, cfg)
        total = l_image * (lam1 * scale) + l_text * (lam2 * scale)
        li_sum += l_image.item()
        lt_sum += l_text.item()
        total.backward()
    l_image_mean = li_sum * scale
    l_text_mean = lt_sum * scale
    l_total = lam1 * l_image_mean + lam2 * l_text_mean
    if not (np.isfinite(l_image_mean) and np.isfinite(l_text_mean)):
        term = "loss_image" if not np.isfinite(l_image_mean) else "loss_text"
        raise NumericError(f"non-finite {term}")
    grads = collect_grads(params, STAGE_TRAINABLES[stage])
    return l_image_mean, l_text_mean, l_total, grads


class Adam:
    def __init__(self, cfg):
        self.lr = cfg.lr
        self.b1, self.b2, self.eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
        self.m: dict = {}
        self.v: dict = {}
        self.t = 0

    def step(self, params: dict, grads: dict, names) -> None:
        self.t += 1
        b1t = 1.0 - self.b1 ** self.t
        b2t = 1.0 - self.b2 ** self.t
        for name in names:
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = self.b1 * self.m[name] + (1.0 - self.b1) * g
            self.v[name] = self.b2 * self.v[name] + (1.0 - self.b2) * g * g
            mh = self.m[name] / b1t
            vh = self.v[name] / b2t
            params[name].data = params[name].data - self.lr * mh / (np.sqrt(vh) + self.eps)


def init_params(cfg: Config, vocab_size: int, seed: int) -> dict:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    params = init_frontend_params(cfg.frontend, rng)
    params.update(init_model_params(cfg.model, cfg.frontend.d_p, vocab_size, rng))
    return params


def train(records, vocab: Vocab, cfg: Config, stage: int, init: dict | None = None,
          steps: int | None = None, log_path=None, checkpoint_path=None,
          progress=None):
    """Run one stage; returns (params, metrics list).

    Stage 2 requires stage-1 weights via `init` (pass a fresh dict to
    cold-start explicitly). Deterministic for a fixed (records, cfg, seed).
    """
    if stage not in (1, 2):
        raise ValueError("stage must be 1 or 2")
    if stage == 2 and init is None:
        raise ValueError("stage 2 inherits stage-1 weights; pass init "
                         "(or cold-start explicitly)")
    if not records:
        raise ValueError("empty dataset")

    layout = SequenceLayout.from_frontend(cfg.frontend)
    samples = prepare_samples(records, vocab, layout)
    params = init if init is not None else init_params(cfg, len(vocab), cfg.train.seed)

    epochs = cfg.train.stage1_epochs if stage == 1 else cfg.train.stage2_epochs
    batch = max(1, cfg.train.batch_size)
    steps_per_epoch = (len(samples) + batch - 1) // batch
    total_steps = steps if steps is not None else epochs * steps_per_epoch

    opt = Adam(cfg.train)
    trainable_groups = STAGE_TRAINABLES[stage]
    names = [n for n in sorted(params) if group_of(n) in trainable_groups]

    rng = np.random.default_rng(np.random.SeedSequence((cfg.train.seed, stage)))
    order: list = []
    metrics = []
    log_fh = open(log_path, "w") if log_path else None
    t0 = time.time()
    try:
        for step_i in range(total_steps):
            if len(order) < batch:
                order.extend(rng.permutation(len(samples)).tolist())
            take, order = order[:batch], order[batch:]
            batch_samples = [samples[i] for i in take]
            li, lt, ltot, grads = loss_and_grads(params, batch_samples, stage, cfg)
            opt.step(params, grads, names)
            row = {"step": step_i, "stage": stage, "loss_image": li,
                   "loss_text": lt, "loss_total": ltot,
                   "wall_time": round(time.time() - t0, 4)}
            metrics.append(row)
            if log_fh:
                log_fh.write(json.dumps({"schema": METRICS_SCHEMA, **row}) + "\n")
            if progress and (step_i % progress == 0 or step_i == total_steps - 1):
                print(f"  stage {stage} step {step_i + 1}/{total_steps} "
                      f"L_img {li:.4f} L_txt {lt:.4f}")
    except NumericError:
        if checkpoint_path:
            save_checkpoint(params, {"stage": stage, "aborted": True}, checkpoint_path)
        raise
    finally:
        if log_fh:
            log_fh.close()
    return params, metrics
